"""Derivative-level objects at a point.

The flat ambient derivative of a frame field is exact: frame vectors are
built from expression jets, so their parameter derivatives are known to
machine precision.  Constructed fields (the radical, screen, ltr and screen
transversal bases) come out of a linear-algebra pipeline and are
differentiated by central differences of anchored decompositions at
neighbouring points, with one Richardson halving.

Everything else is a split of such a derivative: the Gauss formula for
tangent fields, Weingarten for transversal ones and the screen/radical split
of the induced connection.  Second fundamental forms and shape operators are
tensorial, so :class:`SffBundle` stores them on frame vectors only; values on
arbitrary arguments follow by multilinearity.

The (l, m)-type connection is

    Omega_X Y = nabla_X Y + theta(Y) (l X + m J X),   theta(X) = g(X, eta),

and its induced objects are computed twice: directly, by splitting Omega
outputs, and from the unbarred objects through the correction formulas.
"""
from __future__ import annotations

from dataclasses import dataclass, fields
from functools import cached_property

import numpy as np

from .semilinalg import cross_gram
from .submanifold import (
    Decomposition,
    FrameJets,
    ManifoldSpec,
    decompose_anchored,
    decompose_frame,
    frame_jets,
    frame_vectors,
)

FD_STEP = 1e-5


@dataclass(frozen=True)
class FrameField:
    """Value and parameter partials (n x m) of a vector field at a point."""

    value: np.ndarray
    partials: np.ndarray
    exact: bool = True


@dataclass(frozen=True)
class FieldPartials:
    """Parameter partials of the constructed bases, each of shape (count, n, m)."""

    rad: np.ndarray
    stm: np.ndarray
    ltr: np.ndarray
    stmperp: np.ndarray
    richardson_gap: float


def richardson(f, step: float = FD_STEP):
    """Central difference of ``f(h)`` around h = 0 with one halving.

    Returns (estimate, |D(h) - D(h/2)|) where the second value is the
    per-component change that the halving produced.
    """
    d1 = (f(step) - f(-step)) / (2 * step)
    d2 = (f(step / 2) - f(-step / 2)) / step
    return (4 * d2 - d1) / 3, np.max(np.abs(np.asarray(d1 - d2))) if np.size(d1) else 0.0


def constructed_partials(spec: ManifoldSpec, decomp: Decomposition, step: float = FD_STEP) -> FieldPartials:
    """Finite-difference parameter partials of the decomposition's bases."""
    m = spec.param_dim
    names = ("rad", "stm", "ltr", "stmperp")
    out = {k: np.zeros((getattr(decomp, k).dim, spec.ambient_dim, m)) for k in names}
    gap = 0.0
    for i in range(m):
        e = np.zeros(m)
        e[i] = 1.0
        cache: dict[float, Decomposition] = {}

        def at(h):
            if h not in cache:
                cache[h] = decompose_anchored(spec, decomp.t + h * e, decomp)
            return cache[h]

        for k in names:
            if not out[k].shape[0]:
                continue
            est, g = richardson(lambda h: getattr(at(h), k).vectors, step)
            out[k][:, :, i] = est
            gap = max(gap, float(g))
    return FieldPartials(out["rad"], out["stm"], out["ltr"], out["stmperp"], gap)


class PointGeometry:
    """Frames, decomposition and all first derivatives at one parameter point."""

    def __init__(self, spec: ManifoldSpec, t, step: float = FD_STEP):
        self.spec = spec
        self.step = step
        self.fj: FrameJets = frame_jets(spec, t)
        self.decomp: Decomposition = decompose_frame(spec, self.fj)
        self.t = self.fj.t
        self.g = spec.metric
        self.J = spec.bronze.matrix

    # -- bases -------------------------------------------------------------
    @property
    def B(self) -> np.ndarray:
        return self.fj.vectors

    @property
    def xi(self) -> np.ndarray:
        return self.decomp.rad.vectors

    @property
    def S(self) -> np.ndarray:
        return self.decomp.stm.vectors

    @property
    def N(self) -> np.ndarray:
        return self.decomp.ltr.vectors

    @property
    def W(self) -> np.ndarray:
        return self.decomp.stmperp.vectors

    @cached_property
    def partials(self) -> FieldPartials:
        return constructed_partials(self.spec, self.decomp, self.step)

    def coords(self, V) -> np.ndarray:
        """Frame coordinates of tangent vectors (rows)."""
        V = np.atleast_2d(V)
        c, *_ = np.linalg.lstsq(self.B.T, V.T, rcond=None)
        return c.T

    # -- derivatives -------------------------------------------------------
    def along(self, x, partials: np.ndarray) -> np.ndarray:
        """Derivative of fields with the given partials (..., n, m) along sum_a x_a B_a."""
        return partials @ (np.asarray(x, dtype=float) @ self.fj.directions)

    def dd(self, partials: np.ndarray) -> np.ndarray:
        """Derivatives of every field (count, n, m) along every frame vector: (k, count, n)."""
        return np.einsum("cnm,am->acn", partials, self.fj.directions)

    def frame_field(self, coeffs) -> FrameField:
        c = np.asarray(coeffs, dtype=float)
        return FrameField(c @ self.B, np.einsum("b,bnm->nm", c, self.fj.partials))

    def theta(self, V) -> np.ndarray:
        V = np.asarray(V, dtype=float)
        return (V * self.g.eps) @ self.spec.lm.eta

    def fd_scalar(self, fun, x) -> float:
        """Derivative of the scalar ``fun(t)`` along sum_a x_a B_a by central differences."""
        d = np.asarray(x, dtype=float) @ self.fj.directions
        est, _ = richardson(lambda h: np.asarray(fun(self.t + h * d)), self.step)
        return float(est)

    def fd_vector(self, fun, x) -> np.ndarray:
        d = np.asarray(x, dtype=float) @ self.fj.directions
        est, _ = richardson(lambda h: np.asarray(fun(self.t + h * d)), self.step)
        return est

    def frame_at(self, t) -> np.ndarray:
        return frame_vectors(self.spec, t)


def point_geometry(spec: ManifoldSpec, t, step: float = FD_STEP) -> PointGeometry:
    return PointGeometry(spec, t, step)


def ambient_derivative(spec: ManifoldSpec, X, Y: FrameField, t=None, geom: PointGeometry | None = None) -> np.ndarray:
    """Flat derivative of the field Y along the tangent vector with frame coordinates X."""
    geom = geom or PointGeometry(spec, t)
    return geom.along(X, Y.partials)


def gauss_split(v, decomp: Decomposition) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(tangential, ltr, S(TM^perp)) parts of an ambient vector."""
    p = decomp.expand(v)
    return p.tangent, p.ltr, p.stmperp


# --------------------------------------------------------------------------
# bundles
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SffBundle:
    """Second fundamental forms, shape operators and transversal connections on frame vectors.

    Index conventions (k frame vectors B_a, r radical/ltr vectors, s screen
    vectors S_c, p screen transversal vectors W_j), all values ambient vectors:

    * ``nabla[a, b]``, ``hl[a, b]``, ``hs[a, b]``: Gauss split of D_{B_a} B_b
    * ``AN[i, a]``, ``nabla_l[i, a]``, ``Ds[i, a]``: Weingarten split of D_{B_a} N_i
    * ``AW[j, a]``, ``nabla_s[j, a]``, ``Dl[j, a]``: Weingarten split of D_{B_a} W_j
    * ``nabla_star[a, c]``, ``hstar[a, c]``: screen/radical split of nabla_{B_a} S_c
    * ``Astar[i, a]``, ``nabla_star_t[i, a]``: screen/radical split of nabla_{B_a} xi_i

    D is the flat derivative for the Levi-Civita bundle and Omega for the
    (l, m) bundle (where ``nabla`` holds the induced connection Omega).
    """

    nabla: np.ndarray
    hl: np.ndarray
    hs: np.ndarray
    AN: np.ndarray
    nabla_l: np.ndarray
    Ds: np.ndarray
    AW: np.ndarray
    nabla_s: np.ndarray
    Dl: np.ndarray
    nabla_star: np.ndarray
    hstar: np.ndarray
    Astar: np.ndarray
    nabla_star_t: np.ndarray

    def max_difference(self, other: "SffBundle") -> dict[str, float]:
        out = {}
        for f in fields(self):
            a, b = getattr(self, f.name), getattr(other, f.name)
            out[f.name] = float(np.max(np.abs(a - b))) if a.size else 0.0
        return out


def _split_derivatives(geom: PointGeometry, dBB, dN, dW, dS, dxi) -> SffBundle:
    d = geom.decomp
    pBB = d.split_many(dBB)
    pN = d.split_many(np.swapaxes(dN, 0, 1))  # (r, k, n)
    pW = d.split_many(np.swapaxes(dW, 0, 1))
    pS = d.split_many(dS)  # (k, s, n): tangent parts then split screen/radical
    pX = d.split_many(np.swapaxes(dxi, 0, 1))
    return SffBundle(
        nabla=pBB.tangent,
        hl=pBB.ltr,
        hs=pBB.stmperp,
        AN=-pN.tangent,
        nabla_l=pN.ltr,
        Ds=pN.stmperp,
        AW=-pW.tangent,
        nabla_s=pW.stmperp,
        Dl=pW.ltr,
        nabla_star=pS.screen,
        hstar=pS.rad,
        Astar=-pX.screen,
        nabla_star_t=pX.rad,
    )


def flat_derivatives(geom: PointGeometry):
    """Flat derivatives along every frame vector of the frame and constructed fields."""
    fp = geom.partials
    dBB = geom.dd(geom.fj.partials)
    return dBB, geom.dd(fp.ltr), geom.dd(fp.stmperp), geom.dd(fp.stm), geom.dd(fp.rad)


def levi_civita_bundle(spec: ManifoldSpec, t=None, geom: PointGeometry | None = None) -> SffBundle:
    """Unbarred objects: Gauss, Weingarten and screen splits of flat derivatives."""
    geom = geom or PointGeometry(spec, t)
    return _split_derivatives(geom, *flat_derivatives(geom))


def lm_apply(geom: PointGeometry, X: np.ndarray, Y_value: np.ndarray, nablabar_XY: np.ndarray,
             l: float, m: float) -> np.ndarray:
    """Omega_X Y from the flat derivative, for stacked arguments (..., n)."""
    th = geom.theta(Y_value)[..., None]
    return nablabar_XY + th * (l * X + m * (X @ geom.J.T))


@dataclass(frozen=True)
class JFrame:
    """Splits of J B_a for every frame vector: f, w_l, w_s, and the projections used by the screen formulas."""

    f: np.ndarray
    wl: np.ndarray
    ws: np.ndarray


def j_frame(geom: PointGeometry) -> JFrame:
    p = geom.decomp.split_many(geom.B @ geom.J.T)
    return JFrame(p.tangent, p.ltr, p.stmperp)


def lm_direct(geom: PointGeometry, l: float, m: float, flat=None) -> SffBundle:
    """Barred objects by splitting Omega outputs."""
    dBB, dN, dW, dS, dxi = flat if flat is not None else flat_derivatives(geom)
    B = geom.B
    Xk = B[:, None, :]  # X = B_a broadcast against the field index

    def om(vals, dvals):
        Xs = np.broadcast_to(Xk, dvals.shape)
        Ys = np.broadcast_to(vals[None, :, :], dvals.shape)
        return lm_apply(geom, Xs, Ys, dvals, l, m)

    oBB = om(B, dBB)
    oN = om(geom.N, dN) if dN.shape[1] else dN
    oW = om(geom.W, dW) if dW.shape[1] else dW
    oxi = om(geom.xi, dxi) if dxi.shape[1] else dxi
    oS_amb = om(geom.S, dS) if dS.shape[1] else dS
    return _split_derivatives(geom, oBB, oN, oW, oS_amb, oxi)


def lm_formulas(geom: PointGeometry, lc: SffBundle, l: float, m: float, jf: JFrame | None = None) -> SffBundle:
    """Barred objects from the unbarred ones through the correction formulas."""
    jf = jf or j_frame(geom)
    d = geom.decomp
    B = geom.B
    th_B, th_N, th_W, th_S, th_xi = (geom.theta(v) for v in (B, geom.N, geom.W, geom.S, geom.xi))
    P = d.split_many(B).screen  # screen projection of B_a
    Pf = d.split_many(jf.f).screen  # screen projection of f B_a
    # radical parts sum_i eta_i(X) xi_i of B_a and of f B_a, eta_i(X) = g(X, N_i)
    radB = d.split_many(B).rad
    radf = d.split_many(jf.f).rad

    nabla = lc.nabla + l * th_B[None, :, None] * B[:, None, :] + m * th_B[None, :, None] * jf.f[:, None, :]
    hl = lc.hl + m * th_B[None, :, None] * jf.wl[:, None, :]
    hs = lc.hs + m * th_B[None, :, None] * jf.ws[:, None, :]
    AN = lc.AN - l * th_N[:, None, None] * B[None] - m * th_N[:, None, None] * jf.f[None]
    nabla_l = lc.nabla_l + m * th_N[:, None, None] * jf.wl[None]
    Ds = lc.Ds + m * th_N[:, None, None] * jf.ws[None]
    AW = lc.AW - l * th_W[:, None, None] * B[None] - m * th_W[:, None, None] * jf.f[None]
    nabla_s = lc.nabla_s + m * th_W[:, None, None] * jf.ws[None]
    Dl = lc.Dl + m * th_W[:, None, None] * jf.wl[None]
    nabla_star = lc.nabla_star + m * th_S[None, :, None] * Pf[:, None, :] + l * th_S[None, :, None] * P[:, None, :]
    hstar = lc.hstar + l * th_S[None, :, None] * radB[:, None, :] + m * th_S[None, :, None] * radf[:, None, :]
    Astar = lc.Astar - l * th_xi[:, None, None] * P[None] - m * th_xi[:, None, None] * Pf[None]
    nabla_star_t = lc.nabla_star_t + l * th_xi[:, None, None] * radB[None] + m * th_xi[:, None, None] * radf[None]
    return SffBundle(nabla, hl, hs, AN, nabla_l, Ds, AW, nabla_s, Dl, nabla_star, hstar, Astar, nabla_star_t)


# which correction formula produces each barred object
FORMULA_ANCHORS = {
    "nabla": "e9", "hl": "e10", "hs": "e11", "AN": "e12", "nabla_l": "e13", "Ds": "e14",
    "AW": "e15", "nabla_s": "e16", "Dl": "e17", "nabla_star": "e24", "hstar": "e25",
    "Astar": "e26", "nabla_star_t": "e27",
}


@dataclass(frozen=True)
class LMResult:
    direct: SffBundle
    formula: SffBundle
    discrepancy: dict[str, float]  # keyed by identity anchor


def lm_bundle(spec: ManifoldSpec, t=None, l: float | None = None, m: float | None = None,
              geom: PointGeometry | None = None, lc: SffBundle | None = None) -> LMResult:
    """Barred family computed both ways, with the per-identity discrepancy."""
    geom = geom or PointGeometry(spec, t)
    l = spec.lm.l if l is None else l
    m = spec.lm.m if m is None else m
    flat = flat_derivatives(geom)
    lc = lc or _split_derivatives(geom, *flat)
    direct = lm_direct(geom, l, m, flat)
    formula = lm_formulas(geom, lc, l, m)
    diff = direct.max_difference(formula)
    return LMResult(direct, formula, {FORMULA_ANCHORS[k]: v for k, v in diff.items()})


# --------------------------------------------------------------------------
# torsion and non-metricity
# --------------------------------------------------------------------------


def coordinate_fields(geom: PointGeometry) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """Non-vanishing coordinate tangents dF/dt_i (rows), their Hessian and the indices kept."""
    jac, hess = geom.fj.jacobian, geom.fj.hessian
    keep = [i for i in range(jac.shape[1]) if np.linalg.norm(jac[:, i]) > 1e-12]
    return jac[:, keep].T, hess[:, keep][:, :, keep], keep


def torsion_lm(geom: PointGeometry, c, d, l: float, m: float) -> tuple[np.ndarray, np.ndarray]:
    """Torsion of Omega on the commuting coordinate fields X = c.dF, Y = d.dF.

    Returns (Omega_X Y - Omega_Y X - [X, Y], right-hand side
    l(theta(Y)X - theta(X)Y) + m(theta(Y)JX - theta(X)JY)).
    """
    T, H, _ = coordinate_fields(geom)
    X, Y = c @ T, d @ T
    dXY = np.einsum("nij,i,j->n", H, c, d)  # D_X Y; [X, Y] = 0 for coordinate fields
    dYX = np.einsum("nij,i,j->n", H, d, c)
    lhs = lm_apply(geom, X, Y, dXY, l, m) - lm_apply(geom, Y, X, dYX, l, m)
    tX, tY = geom.theta(X), geom.theta(Y)
    rhs = l * (tY * X - tX * Y) + m * (tY * (geom.J @ X) - tX * (geom.J @ Y))
    return lhs, rhs


def nonmetricity(geom: PointGeometry, x, y, z, l: float, m: float) -> tuple[float, float]:
    """(Omega_X g)(Y, Z) for frame-combination fields, and its closed form.

    The left side is X g(Y, Z) - g(Omega_X Y, Z) - g(Y, Omega_X Z) with the
    first term differenced numerically along X; the right side is
    -l{theta(Y)g(X,Z) + theta(Z)g(X,Y)} - m{theta(Y)g(JX,Z) + theta(Z)g(JX,Y)}.
    """
    g, J = geom.g, geom.J
    Yf, Zf = geom.frame_field(y), geom.frame_field(z)
    X = np.asarray(x) @ geom.B
    Y, Z = Yf.value, Zf.value

    def gYZ(t):
        Bt = geom.frame_at(t)
        return cross_gram(g, np.asarray(y) @ Bt, np.asarray(z) @ Bt)[0, 0]

    xg = geom.fd_scalar(gYZ, x)
    oY = lm_apply(geom, X, Y, geom.along(x, Yf.partials), l, m)
    oZ = lm_apply(geom, X, Z, geom.along(x, Zf.partials), l, m)
    lhs = xg - cross_gram(g, oY, Z)[0, 0] - cross_gram(g, Y, oZ)[0, 0]
    tY, tZ = geom.theta(Y), geom.theta(Z)

    def ip(a, b):
        return cross_gram(g, a, b)[0, 0]

    rhs = -l * (tY * ip(X, Z) + tZ * ip(X, Y)) - m * (tY * ip(J @ X, Z) + tZ * ip(J @ X, Y))
    return float(lhs), float(rhs)
