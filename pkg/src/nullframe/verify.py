"""Identity suite, theorem-condition checks, umbilicity and minimality.

Every identity is evaluated as "left minus right", each side assembled from
independently computed ingredients (Gauss/Weingarten splits of numerically
differentiated fields, J-splits, theta values).  Theorem iff-statements are
never used to derive anything: the direct geometric residual (for example the
part of a bracket outside a distribution) and the theorem's condition are
computed side by side so their agreement can be observed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .connection import (
    PointGeometry,
    SffBundle,
    coordinate_fields,
    j_frame,
    levi_civita_bundle,
    lm_apply,
    lm_bundle,
    nonmetricity,
    richardson,
)
from .manifest import build, load_builtin
from .semilinalg import cross_gram, projector
from .structure import verify_bronze, verify_compatibility
from .submanifold import (
    Decomposition,
    ManifoldSpec,
    ScreenGenericReport,
    decompose_anchored,
    projections,
    screen_generic_report,
)

DEFAULT_TOL = 1e-8


class DistributionTooSmall(ValueError):
    pass


# --------------------------------------------------------------------------
# report
# --------------------------------------------------------------------------


@dataclass
class ResidualEntry:
    name: str
    anchor: str
    max_residual: float
    tolerance: float
    status: str = "pass"
    samples: int = 0

    @property
    def passed(self) -> bool:
        return self.status != "fail"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "anchor": self.anchor,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "status": self.status,
            "samples": self.samples,
        }


@dataclass
class ResidualReport:
    """Named identity -> max residual over sampled points and arguments."""

    entries: dict[str, ResidualEntry] = field(default_factory=dict)
    discrepancies: list[str] = field(default_factory=list)
    tolerance: float = DEFAULT_TOL

    def record(self, name: str, anchor: str, value: float, tol: float | None = None) -> None:
        tol = self.tolerance if tol is None else tol
        e = self.entries.get(name)
        if e is None or e.status.startswith("skipped"):
            e = self.entries[name] = ResidualEntry(name, anchor, 0.0, tol, "pass", 0)
        value = float(value)
        if not math.isfinite(value):
            value = math.inf
        e.max_residual = max(e.max_residual, value)
        e.samples += 1
        e.status = "pass" if e.max_residual <= e.tolerance else "fail"

    def skip(self, name: str, anchor: str, reason: str, tol: float | None = None) -> None:
        if name not in self.entries:
            self.entries[name] = ResidualEntry(name, anchor, 0.0, self.tolerance if tol is None else tol,
                                               f"skipped ({reason})", 0)

    def note(self, text: str) -> None:
        if text not in self.discrepancies:
            self.discrepancies.append(text)

    def merge(self, other: "ResidualReport") -> None:
        for e in other.entries.values():
            if e.status.startswith("skipped"):
                self.skip(e.name, e.anchor, e.status[len("skipped ("):-1], e.tolerance)
                continue
            cur = self.entries.get(e.name)
            if cur is None or cur.status.startswith("skipped"):
                self.entries[e.name] = ResidualEntry(e.name, e.anchor, e.max_residual, e.tolerance, e.status,
                                                     e.samples)
            else:
                cur.max_residual = max(cur.max_residual, e.max_residual)
                cur.samples += e.samples
                cur.status = "pass" if cur.max_residual <= cur.tolerance else "fail"
        for d in other.discrepancies:
            self.note(d)

    @property
    def all_passed(self) -> bool:
        return all(e.passed for e in self.entries.values())

    def failures(self) -> list[ResidualEntry]:
        return [e for e in self.entries.values() if not e.passed]

    def to_dict(self) -> dict:
        return {
            "entries": [self.entries[k].to_dict() for k in self.entries],
            "discrepancies": list(self.discrepancies),
        }


# --------------------------------------------------------------------------
# small helpers
# --------------------------------------------------------------------------


def _bil(arr: np.ndarray, x, y) -> np.ndarray:
    return np.einsum("a,b,abn->n", x, y, arr)


def _lin(arr: np.ndarray, c, x) -> np.ndarray:
    return np.einsum("i,a,ian->n", c, x, arr)


class _Ctx:
    """Per-point quantities shared by the identity evaluations."""

    def __init__(self, geom: PointGeometry, lc: SffBundle):
        self.geom = geom
        self.lc = lc
        self.g = geom.g
        self.J = geom.J
        d = geom.decomp
        self.jf = j_frame(geom)
        self.k = geom.B.shape[0]
        self.r, self.s, self.p = d.rad.dim, d.stm.dim, d.stmperp.dim
        self.Scoords = geom.coords(geom.S) if self.s else np.zeros((0, self.k))
        self.xicoords = geom.coords(geom.xi) if self.r else np.zeros((0, self.k))
        split_B = d.split_many(geom.B)
        split_f = d.split_many(self.jf.f)
        self.PB, self.Pf = split_B.screen, split_f.screen

    def ip(self, a, b) -> float:
        return float(np.sum(self.g.eps * np.asarray(a) * np.asarray(b)))

    def th(self, v) -> float:
        return float(self.geom.theta(v))


def _unit_coeffs(rng: np.random.Generator, rows: np.ndarray) -> np.ndarray:
    """Random coefficients c with |c @ rows| = 1 (identities are multilinear, so
    unit arguments put every residual on the same absolute scale)."""
    c = rng.standard_normal(rows.shape[0])
    if rows.shape[0] == 0:
        return c
    norm = float(np.linalg.norm(c @ rows))
    return c / norm if norm > 0 else c


def _draw(rng: np.random.Generator, ctx: _Ctx) -> dict:
    geom = ctx.geom
    return {
        "x": _unit_coeffs(rng, geom.B),
        "y": _unit_coeffs(rng, geom.B),
        "z": _unit_coeffs(rng, geom.B),
        "sig": _unit_coeffs(rng, geom.S),
        "cN": _unit_coeffs(rng, geom.N),
        "cW": _unit_coeffs(rng, geom.W),
        "cx": _unit_coeffs(rng, geom.xi),
    }


# --------------------------------------------------------------------------
# identity suite
# --------------------------------------------------------------------------


def _levi_civita_identities(ctx: _Ctx, a: dict, rep: ResidualReport) -> None:
    geom, lc, ip = ctx.geom, ctx.lc, ctx.ip
    B, S, xi, N_, W_ = geom.B, geom.S, geom.xi, geom.N, geom.W
    x, y, z = a["x"], a["y"], a["z"]
    Y, Z = y @ B, z @ B

    if ctx.p:
        W = a["cW"] @ W_
        lhs = ip(_bil(lc.hs, x, y), W) + ip(Y, _lin(lc.Dl, a["cW"], x))
        rep.record("codazzi_screen_transversal", "(4)", abs(lhs - ip(_lin(lc.AW, a["cW"], x), Y)))
    else:
        rep.skip("codazzi_screen_transversal", "(4)", "S(TM^perp)=0")

    if ctx.r and ctx.p:
        N, W = a["cN"] @ N_, a["cW"] @ W_
        rep.record("ds_aw_pairing", "(5)", abs(ip(_lin(lc.Ds, a["cN"], x), W) - ip(_lin(lc.AW, a["cW"], x), N)))
    else:
        rep.skip("ds_aw_pairing", "(5)", "r=0" if not ctx.r else "S(TM^perp)=0")

    if ctx.r and ctx.s:
        JY = a["sig"] @ S
        yS = a["sig"] @ ctx.Scoords
        xiv = a["cx"] @ xi
        rep.record("hl_astar_pairing", "(8)",
                   abs(ip(_bil(lc.hl, x, yS), xiv) - ip(_lin(lc.Astar, a["cx"], x), JY)))
        N = a["cN"] @ N_
        hst = np.einsum("a,c,acn->n", x, a["sig"], lc.hstar)
        rep.record("hstar_an_pairing", "(9)", abs(ip(hst, N) - ip(_lin(lc.AN, a["cN"], x), JY)))
    else:
        for nm, an in (("hl_astar_pairing", "(8)"), ("hstar_an_pairing", "(9)")):
            rep.skip(nm, an, "r=0" if not ctx.r else "S(TM)=0")

    if ctx.r:
        xiF = a["cx"] @ ctx.xicoords
        xiv = a["cx"] @ xi
        rep.record("hl_radical_null", "(10)", abs(ip(_bil(lc.hl, x, xiF), xiv)))
        rep.record("astar_xi_xi", "(10)", float(np.linalg.norm(_lin(lc.Astar, a["cx"], xiF))))
    else:
        rep.skip("hl_radical_null", "(10)", "r=0")
        rep.skip("astar_xi_xi", "(10)", "r=0")

    def gYZ(t):
        Bt = geom.frame_at(t)
        return ip(y @ Bt, z @ Bt)

    xg = geom.fd_scalar(gYZ, x)
    lhs = xg - ip(_bil(lc.nabla, x, y), Z) - ip(Y, _bil(lc.nabla, x, z))
    rhs = ip(_bil(lc.hl, x, y), Z) + ip(_bil(lc.hl, x, z), Y)
    rep.record("induced_nonmetricity", "(11)", abs(lhs - rhs))


def _lm_identities(ctx: _Ctx, a: dict, l: float, m: float, D: SffBundle, rep: ResidualReport,
                   literal: dict) -> None:
    geom, lc, ip, th, J = ctx.geom, ctx.lc, ctx.ip, ctx.th, ctx.J
    B, S, xi, N_, W_ = geom.B, geom.S, geom.xi, geom.N, geom.W
    jf = ctx.jf
    x, y, z = a["x"], a["y"], a["z"]
    X, Y, Z = x @ B, y @ B, z @ B
    fX, wlX, wsX = x @ jf.f, x @ jf.wl, x @ jf.ws
    tY, tZ = th(Y), th(Z)

    # (e2) ambient non-metricity
    lhs, rhs = nonmetricity(geom, x, y, z, l, m)
    rep.record("lm_nonmetricity", "(e2)", abs(lhs - rhs))

    # (e3) ambient torsion and (e19) induced torsion on commuting coordinate fields
    T, H, _ = coordinate_fields(geom)
    c = a["x"][: T.shape[0]] if T.shape[0] <= ctx.k else np.resize(a["x"], T.shape[0])
    d = a["y"][: T.shape[0]] if T.shape[0] <= ctx.k else np.resize(a["y"], T.shape[0])
    Xc, Yc = c @ T, d @ T
    oXY = lm_apply(geom, Xc, Yc, np.einsum("nij,i,j->n", H, c, d), l, m)
    oYX = lm_apply(geom, Yc, Xc, np.einsum("nij,i,j->n", H, d, c), l, m)
    tXc, tYc = th(Xc), th(Yc)
    rhs3 = l * (tYc * Xc - tXc * Yc) + m * (tYc * (J @ Xc) - tXc * (J @ Yc))
    rep.record("lm_torsion", "(e3)", float(np.linalg.norm(oXY - oYX - rhs3)))
    dec = geom.decomp
    fXc, fYc = dec.expand(J @ Xc).tangent, dec.expand(J @ Yc).tangent
    t19 = dec.expand(oXY).tangent - dec.expand(oYX).tangent
    rhs19 = l * (tYc * Xc - tXc * Yc) + m * (tYc * fXc - tXc * fYc)
    rep.record("induced_torsion", "(e19)", float(np.linalg.norm(t19 - rhs19)))

    # (e4) with D_X(JY) differenced numerically, (e5) with the exact jet derivative
    JY = J @ Y
    tJY = th(JY)
    dXY = geom.along(x, np.einsum("b,bnm->nm", y, geom.fj.partials))
    dJY_fd = geom.fd_vector(lambda t: J @ (y @ geom.frame_at(t)), x)
    rhs45 = l * (tJY * X - tY * (J @ X)) + m * (tJY * (J @ X) - 3 * tY * (J @ X) - tY * X)
    J_oXY = J @ lm_apply(geom, X, Y, dXY, l, m)
    o_JY_fd = lm_apply(geom, X, JY, dJY_fd, l, m)
    o_JY_ex = lm_apply(geom, X, JY, J @ dXY, l, m)
    rep.record("lm_derivative_of_J", "(e4)", float(np.linalg.norm(o_JY_fd - J_oXY - rhs45)))
    rep.record("lm_J_commutation", "(e5)", float(np.linalg.norm(o_JY_ex - (J_oXY + rhs45))))

    # (e18a) induced non-metricity, (e18b) its specialization when the barred h^l vanishes
    def gYZ(t):
        Bt = geom.frame_at(t)
        return ip(y @ Bt, z @ Bt)

    xg = geom.fd_scalar(gYZ, x)
    lhs18 = xg - ip(_bil(D.nabla, x, y), Z) - ip(Y, _bil(D.nabla, x, z))
    hl_terms = ip(_bil(lc.hl, x, y), Z) + ip(Y, _bil(lc.hl, x, z))
    base = -l * (tY * ip(X, Z) + tZ * ip(Y, X))
    rhs18 = hl_terms + base - m * (tY * ip(fX, Z) + tZ * ip(Y, fX))
    rep.record("induced_lm_nonmetricity", "(e18a)", abs(lhs18 - rhs18))
    fZ = z @ jf.f
    lit = abs(lhs18 - (hl_terms + base - m * (tY * ip(fX, Z) + tZ * ip(Y, fZ))))
    literal["e18a"] = max(literal.get("e18a", 0.0), lit)
    if np.max(np.abs(D.hl)) <= rep.tolerance:
        rep.record("induced_lm_nonmetricity_hl_free", "(e18b)",
                   abs(lhs18 - (base - m * (tY * ip(fX, Z) + tZ * ip(Y, fX)))))
    else:
        rep.skip("induced_lm_nonmetricity_hl_free", "(e18b)", "premise: barred h^l does not vanish")

    # (e20), (e21)
    if ctx.p:
        cW = a["cW"]
        W = cW @ W_
        tW = th(W)
        lhs20 = ip(_bil(D.hs, x, y), W) + ip(Y, _lin(D.Dl, cW, x))
        common = ip(_lin(D.AW, cW, x), Y) + l * tW * ip(X, Y) + m * tW * ip(fX, Y) + m * tY * ip(wsX, W)
        rep.record("barred_codazzi_screen_transversal", "(e20)", abs(lhs20 - (common + m * tW * ip(Y, wlX))))
        literal["e20"] = max(literal.get("e20", 0.0), abs(lhs20 - (common + m * tW * ip(X, wlX))))
    else:
        rep.skip("barred_codazzi_screen_transversal", "(e20)", "S(TM^perp)=0")
    if ctx.p and ctx.r:
        cW, cN = a["cW"], a["cN"]
        W, N = cW @ W_, cN @ N_
        tW, tN = th(W), th(N)
        lhs21 = ip(_lin(D.Ds, cN, x), W)
        rhs21 = ip(_lin(D.AW, cW, x), N) + l * tW * ip(X, N) + m * tW * ip(fX, N) + m * tN * ip(wsX, W)
        rep.record("barred_ds_aw_pairing", "(e21)", abs(lhs21 - rhs21))
    else:
        rep.skip("barred_ds_aw_pairing", "(e21)", "r=0" if not ctx.r else "S(TM^perp)=0")

    # (e28)-(e31): J is the projection onto S(TM) here
    if ctx.r and ctx.s:
        sig, cx, cN = a["sig"], a["cx"], a["cN"]
        JYs = sig @ S
        yS = sig @ ctx.Scoords
        xiv = cx @ xi
        xiF = cx @ ctx.xicoords
        N = cN @ N_
        t_xi, t_JY, tN = th(xiv), th(JYs), th(N)
        PX, PfX = x @ ctx.PB, x @ ctx.Pf
        lhs28 = ip(_bil(D.hl, x, yS), xiv)
        rhs28 = (ip(_lin(D.Astar, cx, x), JYs) + l * t_xi * ip(PX, JYs) + m * t_xi * ip(PfX, JYs)
                 + m * t_JY * ip(wlX, xiv))
        rep.record("barred_hl_astar_pairing", "(e28)", abs(lhs28 - rhs28))
        lhs29 = ip(np.einsum("a,c,acn->n", x, sig, D.hstar), N)
        rhs29 = (ip(_lin(D.AN, cN, x), JYs) + l * tN * ip(X, JYs) + l * t_JY * ip(X, N)
                 + m * tN * ip(fX, JYs) + m * t_JY * ip(fX, N))
        rep.record("barred_hstar_an_pairing", "(e29)", abs(lhs29 - rhs29))
        rep.record("barred_hl_radical", "(e30)",
                   abs(ip(_bil(D.hl, x, xiF), xiv) - m * t_xi * ip(wlX, xiv)))
        Pxi = xiF @ ctx.PB
        Pfxi = xiF @ ctx.Pf
        rep.record("barred_astar_xi_xi", "(e31)",
                   float(np.linalg.norm(_lin(D.Astar, cx, xiF) + l * t_xi * Pxi + m * t_xi * Pfxi)))
    else:
        reason = "r=0" if not ctx.r else "S(TM)=0"
        for nm, an in (("barred_hl_astar_pairing", "(e28)"), ("barred_hstar_an_pairing", "(e29)"),
                       ("barred_hl_radical", "(e30)"), ("barred_astar_xi_xi", "(e31)")):
            rep.skip(nm, an, reason)


_ROUTE_NAMES = {
    "e9": "induced_connection", "e10": "barred_hl", "e11": "barred_hs", "e12": "barred_AN",
    "e13": "barred_ltr_connection", "e14": "barred_Ds", "e15": "barred_AW",
    "e16": "barred_screen_transversal_connection", "e17": "barred_Dl", "e24": "barred_screen_connection",
    "e25": "barred_hstar", "e26": "barred_Astar", "e27": "barred_radical_connection",
}
_NEEDS = {
    "e12": "r", "e13": "r", "e14": "r", "e25": "r", "e26": "r", "e27": "r",
    "e15": "p", "e16": "p", "e17": "p", "e24": "s",
}


def point_identities(spec: ManifoldSpec, t, lm_samples, rng: np.random.Generator, draws: int = 2,
                     tol: float = DEFAULT_TOL, geom: PointGeometry | None = None) -> ResidualReport:
    """All identities at one point, for every (l, m) in ``lm_samples``."""
    rep = ResidualReport(tolerance=tol)
    geom = geom or PointGeometry(spec, t)
    lc = levi_civita_bundle(spec, geom=geom)
    ctx = _Ctx(geom, lc)
    dBB = geom.dd(geom.fj.partials)
    rep.record("gauss_reconstruction", "(1)", float(np.max(np.abs(dBB - lc.nabla - lc.hl - lc.hs))))
    rep.record("hl_symmetric", "(1)", float(np.max(np.abs(lc.hl - np.swapaxes(lc.hl, 0, 1)))))
    rep.record("hs_symmetric", "(1)", float(np.max(np.abs(lc.hs - np.swapaxes(lc.hs, 0, 1)))))
    JB = geom.B @ geom.J.T
    rep.record("tangent_J_split", "(s1)", float(np.max(np.abs(ctx.jf.f + ctx.jf.wl + ctx.jf.ws - JB))))
    tr = np.vstack([geom.N, geom.W])
    if tr.shape[0]:
        p = geom.decomp.split_many(tr @ geom.J.T)
        rep.record("transversal_J_split", "(s2)", float(np.max(np.abs(p.tangent + p.transversal - tr @ geom.J.T))))
    for _ in range(draws):
        _levi_civita_identities(ctx, _draw(rng, ctx), rep)
    literal: dict[str, float] = {}
    for (l, m) in lm_samples:
        res = lm_bundle(spec, geom=geom, lc=lc, l=l, m=m)
        for anchor, val in res.discrepancy.items():
            need = _NEEDS.get(anchor)
            if need and getattr(ctx, need) == 0:
                rep.skip(_ROUTE_NAMES[anchor], f"({anchor})", {"r": "r=0", "p": "S(TM^perp)=0", "s": "S(TM)=0"}[need])
            else:
                rep.record(_ROUTE_NAMES[anchor], f"({anchor})", val)
        for _ in range(draws):
            _lm_identities(ctx, _draw(rng, ctx), l, m, res.direct, rep, literal)
    if literal.get("e18a", 0.0) > tol:
        rep.note("(e18a) as printed ends with theta(Z)g(Y,fZ); that form has residual "
                 "above tolerance, the entry uses theta(Z)g(Y,fX)")
    if "e20" in literal:
        verdict = "also passes here" if literal["e20"] <= tol else "fails here"
        rep.note(f"(e20) as printed ends with m theta(W) g(X, w_l X); the entry uses g(Y, w_l X) "
                 f"(the printed form {verdict})")
    return rep


def bronze_entries(spec: ManifoldSpec, tol: float = 1e-12) -> ResidualReport:
    rep = ResidualReport(tolerance=tol)
    rep.record("bronze_axiom", "(a)", verify_bronze(spec.bronze))
    sym, cons = verify_compatibility(spec.bronze, spec.metric)
    rep.record("bronze_compatibility", "(b)", sym)
    rep.record("bronze_compatibility_consequence", "(c)", cons)
    return rep


def identity_suite(spec: ManifoldSpec, points, lm_samples, seed: int = 0, draws: int = 2,
                   tol: float = DEFAULT_TOL, map_fn=map) -> ResidualReport:
    """Residual report over all points; a point whose frames jump is skipped with a note."""
    points = [np.asarray(p, dtype=float) for p in points]
    if not points:
        raise ValueError("identity_suite needs at least one point")
    lm_samples = [(float(l), float(m)) for l, m in lm_samples]

    def one(i):
        rng = np.random.default_rng([seed, i])
        try:
            return point_identities(spec, points[i], lm_samples, rng, draws, tol)
        except Exception as exc:  # reported, never silently dropped
            r = ResidualReport(tolerance=tol)
            r.note(f"point {i} skipped: {type(exc).__name__}: {exc}")
            return r

    total = bronze_entries(spec)
    total.tolerance = tol
    for r in map_fn(one, range(len(points))):
        total.merge(r)
    return total


# --------------------------------------------------------------------------
# distributions propagated to neighbouring points
# --------------------------------------------------------------------------


class DistributionFields:
    """Fields spanning B0, B', B = B0 + Rad or Rad, extended to nearby points.

    A vector v of the distribution at the base point is extended by Euclidean
    projection onto the distribution at the neighbouring point; derived fields
    (J v, f v, w v, ...) are computed from that extension with the
    neighbour's own decomposition.  Derivatives use the same central
    differences with one Richardson halving as the connection module.
    """

    def __init__(self, geom: PointGeometry):
        self.geom = geom
        self.spec = geom.spec
        self.decomp = geom.decomp
        self.report: ScreenGenericReport = geom.decomp.generic
        self._cache: dict = {}

    def basis(self, name: str, dec: Decomposition | None = None, rep: ScreenGenericReport | None = None):
        dec = dec or self.decomp
        rep = rep or self.report
        if name == "B0":
            return rep.b0.vectors
        if name == "Bprime":
            return rep.bprime.vectors
        if name == "B":
            return np.vstack([rep.b0.vectors, dec.rad.vectors])
        if name == "rad":
            return dec.rad.vectors
        raise ValueError(f"unknown distribution {name!r}")

    def _neighbour(self, x, h):
        key = (tuple(np.round(x, 15)), h)
        if key not in self._cache:
            d = np.asarray(x) @ self.geom.fj.directions
            dec = decompose_anchored(self.spec, self.geom.t + h * d, self.decomp)
            self._cache[key] = (dec, screen_generic_report(self.spec, dec))
        return self._cache[key]

    def extend(self, name: str, v0: np.ndarray):
        """Field value function (dec, rep) -> vector for the extension of v0."""

        def f(dec, rep):
            rows = self.basis(name, dec, rep)
            return projector(rows) @ v0 if rows.shape[0] else np.zeros_like(v0)

        return f

    def derivative(self, fieldfun, X: np.ndarray) -> np.ndarray:
        """Flat derivative of a field along the tangent vector X."""
        x = self.geom.coords(X)[0]
        est, _ = richardson(lambda h: fieldfun(*self._neighbour(x, h)) if h else fieldfun(self.decomp, self.report),
                            self.geom.step)
        return est


@dataclass(frozen=True)
class ConditionResult:
    """A direct geometric residual and the theorem's condition residuals at a point."""

    kind: str
    direct: float
    conditions: dict[str, float]
    tol: float = DEFAULT_TOL

    @property
    def holds(self) -> bool:
        return self.direct <= self.tol

    @property
    def conditions_hold(self) -> bool:
        return all(v <= self.tol for v in self.conditions.values())

    @property
    def consistent(self) -> bool:
        """The iff statement is observed at this point (both sides agree)."""
        return self.holds == self.conditions_hold

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "direct": self.direct,
            "conditions": dict(self.conditions),
            "holds": self.holds,
            "conditions_hold": self.conditions_hold,
            "consistent": self.consistent,
        }


class _Theory:
    """Barred objects and splits needed by the theorem conditions at one point."""

    def __init__(self, geom: PointGeometry, l: float, m: float):
        self.geom = geom
        self.l, self.m = l, m
        self.g = geom.g
        self.J = geom.J
        self.dec = geom.decomp
        # bundles and neighbour decompositions are shared by every check at this point
        cache = geom.__dict__.setdefault("_theory_cache", {})
        if "lc" not in cache:
            cache["lc"] = levi_civita_bundle(geom.spec, geom=geom)
            cache["fields"] = DistributionFields(geom)
        self.lc = cache["lc"]
        self.fields = cache["fields"]
        if (l, m) not in cache:
            cache[(l, m)] = lm_bundle(geom.spec, geom=geom, lc=self.lc, l=l, m=m).direct
        self.D = cache[(l, m)]

    def ip(self, a, b) -> float:
        return float(np.sum(self.g.eps * a * b))

    def c(self, V) -> np.ndarray:
        return self.geom.coords(V)[0]

    def omega_bar(self, X, Yval, dY) -> np.ndarray:
        return lm_apply(self.geom, X, Yval, dY, self.l, self.m)

    def f(self, V):
        return self.dec.expand(self.J @ V).tangent

    def w(self, V):
        return self.dec.expand(self.J @ V).transversal

    def C(self, V):
        return self.dec.expand(self.J @ V).transversal

    def bil(self, arr, X, Y):
        return _bil(arr, self.c(X), self.c(Y))

    def A_bar(self, V, X):
        """Barred shape operator of a transversal vector V applied to tangent X."""
        p = self.dec.expand(V)
        x = self.c(X)
        out = np.zeros(self.g.dim)
        if p.ltr_coeffs.size:
            out += _lin(self.D.AN, p.ltr_coeffs, x)
        if p.stmperp_coeffs.size:
            out += _lin(self.D.AW, p.stmperp_coeffs, x)
        return out

    def Dl_bar(self, X, W):
        p = self.dec.expand(W)
        return _lin(self.D.Dl, p.stmperp_coeffs, self.c(X)) if p.stmperp_coeffs.size else np.zeros(self.g.dim)

    def hstar_bar(self, X, V):
        """Barred h* of tangent X and screen vector V."""
        S = self.dec.stm.vectors
        sig = np.linalg.lstsq(S.T, self.dec.expand(V).screen, rcond=None)[0]
        return np.einsum("a,c,acn->n", self.c(X), sig, self.D.hstar)

    # derivatives of propagated fields ------------------------------------
    def d_field(self, fun, X):
        return self.fields.derivative(fun, X)

    def J_of(self, name, v0):
        ext = self.fields.extend(name, v0)
        return lambda dec, rep: self.J @ ext(dec, rep)

    def f_of(self, name, v0):
        ext = self.fields.extend(name, v0)
        return lambda dec, rep: dec.expand(self.J @ ext(dec, rep)).tangent

    def ws_of(self, name, v0):
        ext = self.fields.extend(name, v0)
        return lambda dec, rep: dec.expand(self.J @ ext(dec, rep)).stmperp

    def omega_tangent(self, X, fun):
        """Tangent part of Omega_X V for a propagated field V."""
        val = fun(self.dec, self.fields.report)
        return self.dec.expand(self.omega_bar(X, val, self.d_field(fun, X))).tangent

    def omega_full(self, X, fun):
        val = fun(self.dec, self.fields.report)
        return self.omega_bar(X, val, self.d_field(fun, X))


def _pairs(rows_a, rows_b=None):
    rows_b = rows_a if rows_b is None else rows_b
    for i, a in enumerate(rows_a):
        for j, b in enumerate(rows_b):
            yield i, j, a, b


def integrability_check(spec: ManifoldSpec, dist: str, t=None, geom: PointGeometry | None = None,
                        l: float | None = None, m: float | None = None, tol: float = DEFAULT_TOL) -> ConditionResult:
    """Part of [X, Y] outside the distribution, and the matching theorem conditions."""
    geom = geom or PointGeometry(spec, t)
    th = _Theory(geom, spec.lm.l if l is None else l, spec.lm.m if m is None else m)
    F = th.fields
    rows = F.basis(dist)
    if rows.shape[0] < 2:
        raise DistributionTooSmall(f"{dist} has dimension {rows.shape[0]} at this point")
    rep = F.report
    direct = 0.0
    for i, j, X, Y in _pairs(rows):
        if j <= i:
            continue
        dXY = th.d_field(F.extend(dist, Y), X)
        dYX = th.d_field(F.extend(dist, X), Y)
        br = th.dec.expand(dXY - dYX)
        j0, j1, q = projections(br.tangent, rep)
        outside = {"B0": j1 + q, "Bprime": j0 + j1, "B": q}[dist]
        direct = max(direct, float(np.linalg.norm(outside)), float(np.linalg.norm(br.transversal)))
    cond: dict[str, float] = {}
    J = th.J
    bprime = rep.bprime.vectors
    if dist == "B0":
        ci = cii = 0.0
        for i, j, X, Y in _pairs(rows):
            JX, JY = J @ X, J @ Y
            for N in th.dec.ltr.vectors:
                a1 = th.hstar_bar(X, JY)
                a2 = th.hstar_bar(Y, JX)
                ci = max(ci, abs(th.ip(a1, J @ N) + 3 * th.ip(a2, N) - th.ip(a2, J @ N) - 3 * th.ip(a1, N)))
            om_X_JY = th.dec.expand(th.omega_tangent(X, th.J_of(dist, Y))).screen
            om_Y_JX = th.dec.expand(th.omega_tangent(Y, th.J_of(dist, X))).screen
            for Z in bprime:
                fZ = th.f(Z)
                lhs = th.ip(om_X_JY, fZ) + th.ip(th.bil(th.D.hs, X, JY), J @ Z) + 3 * th.ip(om_Y_JX, Z)
                rhs = th.ip(om_Y_JX, fZ) + th.ip(th.bil(th.D.hs, Y, JX), J @ Z) + 3 * th.ip(om_X_JY, Z)
                cii = max(cii, abs(lhs - rhs))
        cond = {"i": ci, "ii": cii}
    elif dist == "Bprime":
        ci = cii = 0.0
        for i, j, Y, Z in _pairs(rows):
            fY, fZ = th.f(Y), th.f(Z)
            wY, wZ = th.w(Y), th.w(Z)
            scr = lambda v: th.dec.expand(v).screen  # noqa: E731
            om_Y_fZ = scr(th.omega_tangent(Y, th.f_of(dist, Z)))
            om_Z_fY = scr(th.omega_tangent(Z, th.f_of(dist, Y)))
            om_Z_Y = scr(th.omega_tangent(Z, F.extend(dist, Y)))
            om_Y_Z = scr(th.omega_tangent(Y, F.extend(dist, Z)))
            V = om_Y_fZ + th.A_bar(wY, Z) + 3 * om_Z_Y - om_Z_fY - th.A_bar(wZ, Y) - 3 * om_Y_Z
            j0, _, _ = projections(th.dec.expand(V).tangent, rep)
            ci = max(ci, float(np.linalg.norm(j0)))
            V2 = (th.A_bar(wY, Z) + th.hstar_bar(Y, fZ) + 3 * th.hstar_bar(Z, Y)
                  - th.A_bar(wZ, Y) - th.hstar_bar(Z, fY) - 3 * th.hstar_bar(Y, Z))
            cii = max(cii, float(np.linalg.norm(V2)))
        cond = {"i": ci, "ii": cii}
    else:  # B
        c0 = 0.0
        for i, j, X, Y in _pairs(rows):
            JX, JY = J @ X, J @ Y
            om_X_JY = th.omega_tangent(X, th.J_of(dist, Y))
            om_Y_JX = th.omega_tangent(Y, th.J_of(dist, X))
            for Z in bprime:
                fZ = th.f(Z)
                lhs = th.ip(om_X_JY, fZ) + th.ip(th.bil(th.D.hs, X, JY), J @ Z) + 3 * th.ip(om_Y_JX, Z)
                rhs = th.ip(om_Y_JX, fZ) + th.ip(th.bil(th.D.hs, Y, JX), J @ Z) + 3 * th.ip(om_X_JY, Z)
                c0 = max(c0, abs(lhs - rhs))
        cond = {"i": c0}
    return ConditionResult(f"integrable[{dist}]", direct, cond, tol)


def parallelism_check(spec: ManifoldSpec, dist: str, t=None, geom: PointGeometry | None = None,
                      l: float | None = None, m: float | None = None, tol: float = DEFAULT_TOL) -> ConditionResult:
    """Parallelism of B0 or B' under the induced connection, with the theorem conditions."""
    geom = geom or PointGeometry(spec, t)
    th = _Theory(geom, spec.lm.l if l is None else l, spec.lm.m if m is None else m)
    F = th.fields
    rep = F.report
    J = th.J
    b0, bp, Ns = rep.b0.vectors, rep.bprime.vectors, th.dec.ltr.vectors
    direct, ci, cii = 0.0, 0.0, 0.0
    if dist == "B0":
        for _, _, X, Y in _pairs(b0):
            om = th.omega_tangent(X, F.extend("B0", Y))
            for Z in bp:
                direct = max(direct, abs(th.ip(om, Z)))
            for N in Ns:
                direct = max(direct, abs(th.ip(om, N)))
            JY = J @ Y
            hs_ = th.hstar_bar(X, JY)
            for N in Ns:
                ci = max(ci, abs(th.ip(hs_, J @ N) - 3 * th.ip(hs_, N)))
            om_s = th.dec.expand(th.omega_tangent(X, th.J_of("B0", Y))).screen
            for Z in bp:
                cii = max(cii, abs(th.ip(om_s, th.f(Z)) + th.ip(th.bil(th.D.hs, X, JY), J @ Z) - 3 * th.ip(om_s, Z)))
    elif dist == "Bprime":
        for _, _, Y, Z in _pairs(bp):
            om = th.omega_tangent(Y, F.extend("Bprime", Z))
            for X in b0:
                direct = max(direct, abs(th.ip(om, X)))
            for N in Ns:
                direct = max(direct, abs(th.ip(om, N)))
            fZ, wZ = th.f(Z), th.w(Z)
            hs_ = th.hstar_bar(Y, fZ)
            aw = th.A_bar(wZ, Y)
            for N in Ns:
                ci = max(ci, abs(th.ip(hs_, J @ N) + 3 * th.ip(aw, N) - 3 * th.ip(hs_, N) - th.ip(aw, J @ N)))
            om_s = th.dec.expand(th.omega_tangent(Y, th.f_of("Bprime", Z))).screen
            for X in b0:
                cii = max(cii, abs(th.ip(om_s, J @ X) + 3 * th.ip(aw, X) - th.ip(aw, J @ X) - 3 * th.ip(om_s, X)))
    else:
        raise ValueError("parallelism is checked for B0 or Bprime")
    return ConditionResult(f"parallel[{dist}]", direct, {"i": ci, "ii": cii}, tol)


def geodesicity_check(spec: ManifoldSpec, mode: str, t=None, geom: PointGeometry | None = None,
                      l: float | None = None, m: float | None = None, tol: float = DEFAULT_TOL) -> ConditionResult:
    """B-geodesic or mixed-geodesic residual (barred h^l, h^s) with the theorem conditions."""
    geom = geom or PointGeometry(spec, t)
    th = _Theory(geom, spec.lm.l if l is None else l, spec.lm.m if m is None else m)
    F = th.fields
    rep = F.report
    Brows = F.basis("B")
    bp = rep.bprime.vectors

    def h_norm(X, Y):
        return max(float(np.linalg.norm(th.bil(th.D.hl, X, Y))), float(np.linalg.norm(th.bil(th.D.hs, X, Y))))

    if mode == "B_geodesic":
        direct = max((h_norm(X, Y) for _, _, X, Y in _pairs(Brows)), default=0.0)
        # foliation: Omega_X Y stays in B; theorem: iff B-geodesic and B parallel under Omega
        fol = par = 0.0
        for _, _, X, Y in _pairs(Brows):
            full = th.omega_full(X, F.extend("B", Y))
            p = th.dec.expand(full)
            _, _, q = projections(p.tangent, rep)
            fol = max(fol, float(np.linalg.norm(q)), float(np.linalg.norm(p.transversal)))
            par = max(par, float(np.linalg.norm(q)))
        return ConditionResult("B_geodesic", direct, {"foliation": fol, "B_parallel": par}, tol)
    if mode != "mixed_geodesic":
        raise ValueError("mode must be B_geodesic or mixed_geodesic")
    direct = max((h_norm(X, Z) for _, _, X, Z in _pairs(Brows, bp)), default=0.0)
    ci = cii = ciii = 0.0
    for _, _, X, Z in _pairs(Brows, bp):
        fZ = th.f(Z)
        wsZ = th.dec.expand(th.J @ Z).stmperp
        hl_ = th.bil(th.D.hl, X, fZ)
        hs_ = th.bil(th.D.hs, X, fZ)
        dl = th.Dl_bar(X, wsZ)
        om_s_wZ = th.dec.expand(th.omega_full(X, th.ws_of("Bprime", Z))).stmperp
        om_X_fZ = th.omega_tangent(X, th.f_of("Bprime", Z))
        ci = max(ci, float(np.linalg.norm(th.C(hl_ + dl))))
        cii = max(cii, float(np.linalg.norm(th.w(om_X_fZ - th.A_bar(wsZ, X)) + th.C(hs_ + om_s_wZ))))
        ciii = max(ciii, float(np.linalg.norm(hs_ + dl + hl_ + om_s_wZ)))
    return ConditionResult("mixed_geodesic", direct, {"i": ci, "ii": cii, "iii": ciii}, tol)


# --------------------------------------------------------------------------
# umbilicity and minimality
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class UmbilicalFit:
    Hl: np.ndarray
    Hs: np.ndarray
    residual: float
    Dl_residual: float
    mu_component: float | None = None

    def to_dict(self) -> dict:
        return {
            "Hl": self.Hl.tolist(),
            "Hs": self.Hs.tolist(),
            "residual": self.residual,
            "Dl_residual": self.Dl_residual,
            "mu_component": self.mu_component,
        }


def orthonormal_screen(g, S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """g-orthonormal rows spanning span(S) and their signs (indefinite Gram-Schmidt with pivoting)."""
    rest = [v / np.linalg.norm(v) for v in S]
    out, signs = [], []
    while rest:
        # pick the candidate with the largest |g(v, v)| to avoid null pivots
        best = max(range(len(rest)), key=lambda i: abs(float(np.sum(g.eps * rest[i] * rest[i]))))
        v = rest.pop(best)
        nv = float(np.sum(g.eps * v * v))
        e = v / math.sqrt(abs(nv))
        sgn = 1.0 if nv > 0 else -1.0
        out.append(e)
        signs.append(sgn)
        rest = [u - sgn * float(np.sum(g.eps * u * e)) * e for u in rest]
    return np.array(out).reshape(-1, g.dim), np.array(signs)


def umbilical_fit(spec: ManifoldSpec, t=None, geom: PointGeometry | None = None) -> UmbilicalFit:
    """Least-squares transversal curvature vectors H^l, H^s over an orthonormal screen frame."""
    geom = geom or PointGeometry(spec, t)
    lc = levi_civita_bundle(spec, geom=geom)
    g = geom.g
    S = geom.S
    n = g.dim
    E, eps = orthonormal_screen(g, S) if S.shape[0] else (np.zeros((0, n)), np.zeros(0))
    frame = np.vstack([E, geom.xi])
    coords = geom.coords(frame) if frame.shape[0] else np.zeros((0, geom.B.shape[0]))
    G = cross_gram(g, frame, frame)
    hl = np.einsum("pa,qb,abn->pqn", coords, coords, lc.hl)
    hs = np.einsum("pa,qb,abn->pqn", coords, coords, lc.hs)
    denom = float(np.sum(G * G))
    if denom > 0:
        Hl = np.einsum("pq,pqn->n", G, hl) / denom
        Hs = np.einsum("pq,pqn->n", G, hs) / denom
    else:
        Hl = Hs = np.zeros(n)
    res = 0.0
    if frame.shape[0]:
        res = float(max(np.max(np.abs(hl - G[:, :, None] * Hl)), np.max(np.abs(hs - G[:, :, None] * Hs))))
    dl = float(np.max(np.abs(lc.Dl))) if lc.Dl.size else 0.0
    mu_comp = None
    rep = geom.decomp.generic
    if rep is not None and rep.proper and rep.mu.dim:
        mu = rep.mu.vectors
        Gm = cross_gram(g, mu, mu)
        coef = np.linalg.solve(Gm, cross_gram(g, mu, Hs)[:, 0])
        mu_comp = float(np.linalg.norm(coef @ mu))
    return UmbilicalFit(Hl, Hs, res, dl, mu_comp)


@dataclass(frozen=True)
class MinimalityVerdict:
    hs_on_rad_residual: float
    trace_residual: float
    minimal: bool
    frame_sum_residual: float
    trace: np.ndarray = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {
            "hs_on_rad_residual": self.hs_on_rad_residual,
            "trace_residual": self.trace_residual,
            "minimal": self.minimal,
            "frame_sum_residual": self.frame_sum_residual,
        }


def minimality_check(spec: ManifoldSpec, t=None, geom: PointGeometry | None = None,
                     tol: float = DEFAULT_TOL) -> MinimalityVerdict:
    """h^s on the radical and the inverse-Gram trace of h over S(TM).

    ``frame_sum_residual`` is the unweighted sum of h over the screen frame
    vectors, which equals the trace only for an orthonormal screen frame.
    """
    geom = geom or PointGeometry(spec, t)
    lc = levi_civita_bundle(spec, geom=geom)
    g = geom.g
    xiF = geom.coords(geom.xi) if geom.xi.shape[0] else np.zeros((0, geom.B.shape[0]))
    on_rad = 0.0
    if xiF.shape[0]:
        v = np.einsum("ib,abn->ian", xiF, lc.hs)
        on_rad = float(np.max(np.linalg.norm(v, axis=-1)))
    S = geom.S
    if S.shape[0]:
        Sc = geom.coords(S)
        h = lc.hl + lc.hs
        hS = np.einsum("pa,qb,abn->pqn", Sc, Sc, h)
        Ginv = np.linalg.inv(cross_gram(g, S, S))
        trace = np.einsum("pq,pqn->n", Ginv, hS)
        frame_sum = np.einsum("ppn->n", hS)
    else:
        trace = frame_sum = np.zeros(g.dim)
    tr = float(np.linalg.norm(trace))
    return MinimalityVerdict(on_rad, tr, bool(on_rad <= tol and tr <= tol), float(np.linalg.norm(frame_sum)), trace)


# --------------------------------------------------------------------------
# examples and toys
# --------------------------------------------------------------------------


def builtin_example(name: str) -> ManifoldSpec:
    """The built-in example specs: "bronze16" or "minimal11"."""
    return load_builtin(name).spec


def _diag_sigma(n):
    return ["sigma"] * n


def toy_document(name: str, radius: float = 2.0) -> dict:
    """Manifest documents for small test geometries.

    * ``sphere``: sphere of the given radius in the spacelike slice x1 = 0 of
      R^4 with index 1 (non-degenerate, totally umbilical);
    * ``plane``: a spacelike coordinate plane of R^4 with index 1 (totally geodesic);
    * ``null_curve``: the null line t -> (t, t, 0) in R^3 with index 1 (isotropic).
    """
    if name == "sphere":
        R = repr(float(radius))
        return {
            "name": "sphere",
            "ambient": {"dim": 4, "index": 1, "timelike_positions": [1]},
            "params": {"count": 2, "domain": [[0.3, 2.8], [0.0, 6.0]]},
            "embedding": ["0", f"{R}*sin(t1)*cos(t2)", f"{R}*sin(t1)*sin(t2)", f"{R}*cos(t1)"],
            "bronze": {"diagonal": _diag_sigma(4)},
            "lm": {"l": 1, "m": 1, "eta": [0, 0.6, 0, 0.8]},
            "claimed": {"rad_dim": 0, "classification": "NonDegenerate"},
        }
    if name == "plane":
        return {
            "name": "plane",
            "ambient": {"dim": 4, "index": 1, "timelike_positions": [1]},
            "params": {"count": 2, "domain": [[-1, 1], [-1, 1]]},
            "embedding": ["0", "t1", "t2", "0"],
            "bronze": {"diagonal": ["sigma", "sigma", "sigma", "3-sigma"]},
            "lm": {"l": 1, "m": 1, "eta": [0, 0.6, 0, 0.8]},
            "claimed": {"rad_dim": 0, "classification": "NonDegenerate"},
        }
    if name == "null_curve":
        return {
            "name": "null_curve",
            "ambient": {"dim": 3, "index": 1, "timelike_positions": [1]},
            "params": {"count": 1, "domain": [[-1, 1]]},
            "embedding": ["t1", "t1", "0"],
            "bronze": {"diagonal": ["sigma", "sigma", "3-sigma"]},
            "lm": {"l": 1, "m": 0, "eta": [0, 0, 1]},
            "claimed": {"rad_dim": 1, "classification": "Isotropic"},
        }
    raise ValueError(f"unknown toy {name!r}")


def toy_spec(name: str, **kw) -> ManifoldSpec:
    return build(toy_document(name, **kw), name).spec
