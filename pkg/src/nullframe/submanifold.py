"""Per-point geometry of a lightlike submanifold.

From a :class:`ManifoldSpec` this module builds the tangent frame at a
parameter point, the full decomposition

    TM = Rad TM + S(TM),   tr(TM) = ltr(TM) + S(TM^perp),

the four-way classification, and the screen-generic structure (B0, B', mu).

Basis choices are made so that they vary smoothly with the point, which is
what lets the connection module difference constructed frames:

* the radical basis is the reduced row echelon form of the Gram kernel,
  written in frame coordinates (so a frame vector that is itself null is
  returned unchanged);
* S(TM) and S(TM^perp) are the Euclidean-orthogonal complements of the
  radical inside TM and TM^perp;
* ltr(TM) is then uniquely fixed by the pairing conditions.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .exprdsl import ExprAst, eval_vector, eval_vector_jets
from .semilinalg import (
    RANK_TOL,
    SignatureMetric,
    SubspaceBasis,
    cross_gram,
    gram,
    kernel_basis,
    lightlike_transversal,
    orthogonal_space,
    orthonormal_rows,
    projector,
    rank,
    rref,
    screen_complement,
    screen_complement_indices,
    subspace_distance,
)
from .structure import BronzeStructure, FrameIncomplete, LMParams

EXPAND_TOL = 1e-8
CONTINUITY_TOL = 0.1


class GeometryError(ValueError):
    pass


class DegenerateParametrization(GeometryError):
    """The frame (or Jacobian) at a point is rank deficient."""


class FrameDiscontinuity(GeometryError):
    """A neighbouring point produced a bundle too far from the anchor's."""


class NotTangent(GeometryError):
    pass


class OutsideDomain(GeometryError):
    pass


# --------------------------------------------------------------------------
# spec
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ManifoldSpec:
    """Complete problem statement for one submanifold.

    ``frame_matrix`` (k x m) combines the coordinate tangents dF/dt_i into
    the preferred frame.  Alternatively ``frame_fields`` gives the frame
    directly as k lists of n ambient-component expressions; this is used when
    a printed frame does not come from the printed parametrization, in which
    case derivatives along a frame vector are taken along the parameter
    direction that best reproduces it.
    """

    name: str
    metric: SignatureMetric
    embedding: tuple[ExprAst, ...]
    bronze: BronzeStructure
    lm: LMParams
    sample_domain: np.ndarray
    frame_matrix: np.ndarray | None = None
    frame_fields: tuple[tuple[ExprAst, ...], ...] | None = None
    claimed: dict = field(default_factory=dict)
    notes: tuple[str, ...] = ()
    coord_prefix: str = "x"

    def __post_init__(self):
        dom = np.asarray(self.sample_domain, dtype=float).reshape(-1, 2)
        if np.any(dom[:, 1] < dom[:, 0]):
            raise GeometryError("sample domain intervals must satisfy lo <= hi")
        object.__setattr__(self, "sample_domain", dom)
        if len(self.embedding) != self.metric.dim:
            raise GeometryError(
                f"{len(self.embedding)} embedding expressions for a {self.metric.dim}-dimensional ambient"
            )
        if self.bronze.dim != self.metric.dim:
            raise GeometryError("bronze matrix does not match the ambient dimension")
        if self.frame_matrix is not None and self.frame_fields is not None:
            raise GeometryError("give either a frame matrix or frame fields, not both")
        if self.frame_matrix is not None:
            M = np.asarray(self.frame_matrix, dtype=float)
            if M.ndim != 2 or M.shape[1] != self.param_dim:
                raise GeometryError(f"frame matrix must have {self.param_dim} columns")
            if np.linalg.svd(M, compute_uv=False)[-1] <= 1e-9:
                raise GeometryError("frame matrix is not of full row rank")
            M.setflags(write=False)
            object.__setattr__(self, "frame_matrix", M)
        if self.frame_fields is not None:
            for row in self.frame_fields:
                if len(row) != self.metric.dim:
                    raise GeometryError("every frame field needs one expression per ambient coordinate")
        for ast in self._all_asts():
            if ast.param_count != self.param_dim:
                raise GeometryError("expression parameter count does not match the sample domain")

    def _all_asts(self):
        yield from self.embedding
        for row in self.frame_fields or ():
            yield from row

    @property
    def param_dim(self) -> int:
        return self.sample_domain.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.metric.dim

    @property
    def frame_size(self) -> int:
        if self.frame_matrix is not None:
            return self.frame_matrix.shape[0]
        if self.frame_fields is not None:
            return len(self.frame_fields)
        return self.param_dim

    def coord_name(self, i: int) -> str:
        return f"{self.coord_prefix}{i + 1}"

    def check_point(self, t, slack: float = 1e-3) -> np.ndarray:
        t = np.asarray(t, dtype=float).reshape(-1)
        if t.shape != (self.param_dim,):
            raise OutsideDomain(f"expected {self.param_dim} parameters, got {t.size}")
        lo, hi = self.sample_domain[:, 0], self.sample_domain[:, 1]
        pad = slack * np.maximum(hi - lo, 1.0)
        if np.any(t < lo - pad) or np.any(t > hi + pad):
            raise OutsideDomain(f"point {t.tolist()} lies outside the sample domain")
        return t


# --------------------------------------------------------------------------
# frames
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FrameJets:
    """Frame vectors at a point together with their parameter derivatives.

    ``partials[b, :, i]`` is d(B_b)/dt_i; ``directions[a]`` is the parameter
    direction used for differentiating along B_a, so that the ambient
    derivative of B_b along B_a is ``partials[b] @ directions[a]``.
    """

    t: np.ndarray
    point: np.ndarray
    vectors: np.ndarray
    partials: np.ndarray
    directions: np.ndarray
    jacobian: np.ndarray
    hessian: np.ndarray
    direction_mismatch: float

    def along(self, a_coeffs, field_partials: np.ndarray) -> np.ndarray:
        """Derivative of a field (partials shape (n, m)) along sum_a c_a B_a."""
        d = np.asarray(a_coeffs, dtype=float) @ self.directions
        return field_partials @ d


def _embedding_jets(spec: ManifoldSpec, t: np.ndarray):
    return eval_vector_jets(spec.embedding, t)


def frame_vectors(spec: ManifoldSpec, t) -> np.ndarray:
    """Frame vectors only (rows), without derivatives."""
    t = np.asarray(t, dtype=float)
    if spec.frame_fields is not None:
        return np.array([eval_vector(row, t) for row in spec.frame_fields])
    _, jac, _ = _embedding_jets(spec, t)
    if spec.frame_matrix is not None:
        return spec.frame_matrix @ jac.T
    return jac.T.copy()


def frame_jets(spec: ManifoldSpec, t) -> FrameJets:
    t = spec.check_point(t)
    point, jac, hess = _embedding_jets(spec, t)
    m = spec.param_dim
    mismatch = 0.0
    if spec.frame_fields is not None:
        vals, parts = [], []
        for row in spec.frame_fields:
            v, dv, _ = eval_vector_jets(row, t)
            vals.append(v)
            parts.append(dv)
        B = np.array(vals)
        dB = np.array(parts)
        D = np.linalg.lstsq(jac, B.T, rcond=None)[0].T
        recon = D @ jac.T
        scale = np.maximum(np.linalg.norm(B, axis=1), 1.0)
        mismatch = float(np.max(np.linalg.norm(recon - B, axis=1) / scale))
    elif spec.frame_matrix is not None:
        M = spec.frame_matrix
        B = M @ jac.T
        dB = np.einsum("bj,nji->bni", M, hess)
        D = M.copy()
    else:
        B = jac.T.copy()
        dB = np.transpose(hess, (1, 0, 2)).copy()
        D = np.eye(m)
    if rank(B) < B.shape[0]:
        raise DegenerateParametrization(f"frame at t={t.tolist()} has rank {rank(B)} < {B.shape[0]}")
    return FrameJets(t, point, B, dB, D, jac, hess, mismatch)


def tangent_frame(spec: ManifoldSpec, t) -> tuple[np.ndarray, SubspaceBasis]:
    """Point F(t) and the tangent frame there."""
    fj = frame_jets(spec, t)
    return fj.point, SubspaceBasis(fj.vectors, "TM")


# --------------------------------------------------------------------------
# classification
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    kind: str
    r: int

    def __str__(self):
        return f"RLightlike({self.r})" if self.kind == "RLightlike" else self.kind


def classify(r: int, m: int, n: int) -> Classification:
    """Lightlike type from radical rank r, dimension m and codimension n."""
    if r == 0:
        return Classification("NonDegenerate", 0)
    if r < min(m, n):
        return Classification("RLightlike", r)
    if r == n and r < m:
        return Classification("Coisotropic", r)
    if r == m and r < n:
        return Classification("Isotropic", r)
    if r == m == n:
        return Classification("TotallyLightlike", r)
    raise GeometryError(f"radical rank {r} exceeds min(m, n) = {min(m, n)}")


# --------------------------------------------------------------------------
# decomposition
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Parts:
    """Expansion of an ambient vector over the decomposition."""

    screen: np.ndarray
    rad: np.ndarray
    ltr: np.ndarray
    stmperp: np.ndarray
    screen_coeffs: np.ndarray
    rad_coeffs: np.ndarray
    ltr_coeffs: np.ndarray
    stmperp_coeffs: np.ndarray
    residual: float

    @property
    def tangent(self) -> np.ndarray:
        return self.screen + self.rad

    @property
    def transversal(self) -> np.ndarray:
        return self.ltr + self.stmperp


@dataclass(frozen=True)
class ScreenGenericReport:
    rad_invariant: float
    b0: SubspaceBasis
    bprime: SubspaceBasis
    rad: SubspaceBasis
    b0_nondegenerate: bool
    g3_not_in_stm: bool
    g3_not_in_stmperp: bool
    mu: SubspaceBasis
    mu_invariant: float
    ltr_invariant: float
    b0_intersection_residual: float
    wl_bprime: float
    proper: bool
    screen_generic: bool

    def summary(self) -> dict:
        return {
            "rad_invariant": self.rad_invariant,
            "b0_dim": self.b0.dim,
            "bprime_dim": self.bprime.dim,
            "b0_nondegenerate": self.b0_nondegenerate,
            "g3_not_in_stm": self.g3_not_in_stm,
            "g3_not_in_stmperp": self.g3_not_in_stmperp,
            "mu_dim": self.mu.dim,
            "mu_invariant": self.mu_invariant,
            "ltr_invariant": self.ltr_invariant,
            "b0_intersection_residual": self.b0_intersection_residual,
            "wl_bprime": self.wl_bprime,
            "proper": self.proper,
            "screen_generic": self.screen_generic,
        }


@dataclass(frozen=True)
class Decomposition:
    t: np.ndarray
    point: np.ndarray
    metric: SignatureMetric
    tm: SubspaceBasis
    rad: SubspaceBasis
    stm: SubspaceBasis
    stmperp: SubspaceBasis
    ltr: SubspaceBasis
    tmperp: SubspaceBasis
    classification: Classification
    screen_indices: tuple[int, ...]
    generic: ScreenGenericReport | None = None

    @property
    def r(self) -> int:
        return self.rad.dim

    def expand(self, v, tol: float = EXPAND_TOL) -> Parts:
        """Split ``v`` over S(TM), Rad, ltr and S(TM^perp).

        ltr coefficients come from pairing with xi_i, radical coefficients from
        pairing with N_i, screen and screen-transversal ones from their Gram
        solves.
        """
        v = np.asarray(v, dtype=float)
        if v.shape != (self.metric.dim,):
            raise ValueError(f"expected a vector of length {self.metric.dim}")
        return self.split_many(v, tol)

    def split_many(self, V, tol: float = EXPAND_TOL) -> Parts:
        """Vectorised :meth:`expand` over the last axis of ``V``."""
        g = self.metric
        V = np.asarray(V, dtype=float)
        flat = V.reshape(-1, g.dim)
        Ve = flat * g.eps
        xi, N = self.rad.vectors, self.ltr.vectors
        S, W = self.stm.vectors, self.stmperp.vectors
        c = Ve @ xi.T
        b = Ve @ N.T - c @ cross_gram(g, N, N) if xi.shape[0] else np.zeros((flat.shape[0], 0))
        a = np.linalg.solve(gram(g, S), (Ve @ S.T).T).T if S.shape[0] else np.zeros((flat.shape[0], 0))
        d = np.linalg.solve(gram(g, W), (Ve @ W.T).T).T if W.shape[0] else np.zeros((flat.shape[0], 0))
        screen, radp, ltrp, sp = a @ S, b @ xi, c @ N, d @ W
        err = np.linalg.norm(screen + radp + ltrp + sp - flat, axis=1) / np.maximum(1.0, np.linalg.norm(flat, axis=1))
        res = float(err.max()) if err.size else 0.0
        if res > tol:
            raise FrameIncomplete(f"decomposition does not reproduce the vector (residual {res:.3e})")
        lead = V.shape[:-1]

        def sh(x, width):
            return x.reshape(lead + (width,))

        return Parts(
            sh(screen, g.dim), sh(radp, g.dim), sh(ltrp, g.dim), sh(sp, g.dim),
            sh(a, a.shape[1]), sh(b, b.shape[1]), sh(c, c.shape[1]), sh(d, d.shape[1]), res,
        )

    def frame_coords(self, v) -> np.ndarray:
        """Coefficients of a tangent vector over the tangent frame."""
        B = self.tm.vectors
        c, *_ = np.linalg.lstsq(B.T, np.asarray(v, dtype=float), rcond=None)
        if np.linalg.norm(B.T @ c - v) > EXPAND_TOL * max(1.0, np.linalg.norm(v)):
            raise NotTangent("vector is not tangent")
        return c

    def summary(self) -> dict:
        out = {
            "t": self.t.tolist(),
            "classification": str(self.classification),
            "dims": {
                "tm": self.tm.dim,
                "rad": self.rad.dim,
                "stm": self.stm.dim,
                "tmperp": self.tmperp.dim,
                "stmperp": self.stmperp.dim,
                "ltr": self.ltr.dim,
            },
        }
        if self.generic is not None:
            out["screen_generic"] = self.generic.summary()
        return out


def _radical_coefficients(g: SignatureMetric, B: np.ndarray) -> np.ndarray:
    """Rows c with sum_a c_a B_a spanning Rad, in reduced row echelon form."""
    norms = np.linalg.norm(B, axis=1)
    unit = B / norms[:, None]
    K = kernel_basis(gram(g, unit))
    if K.shape[0] == 0:
        return K
    return rref(K / norms[None, :])


def _build(spec: ManifoldSpec, t: np.ndarray, B: np.ndarray, xi: np.ndarray,
           S: np.ndarray, idx: tuple[int, ...], W_rows: np.ndarray | None) -> Decomposition:
    g = spec.metric
    n = g.dim
    tm = SubspaceBasis(B, "TM")
    tmperp = orthogonal_space(g, B, label="TMperp")
    rad = SubspaceBasis(xi, "RadTM") if xi.shape[0] else SubspaceBasis.empty(n, "RadTM")
    stm = SubspaceBasis(S, "STM") if S.shape[0] else SubspaceBasis.empty(n, "STM")
    if W_rows is None:
        stmperp = screen_complement(g, tmperp, rad, label="STMperp")
    else:
        stmperp = SubspaceBasis(W_rows, "STMperp") if W_rows.shape[0] else SubspaceBasis.empty(n, "STMperp")
    if rad.dim:
        ltr = lightlike_transversal(g, rad, stm, stmperp)
    else:
        ltr = SubspaceBasis.empty(n, "ltrTM")
    cls = classify(rad.dim, B.shape[0], n - B.shape[0])
    point = np.zeros(n)
    return Decomposition(t, point, g, tm, rad, stm, stmperp, ltr, tmperp, cls, idx)


def decompose(spec: ManifoldSpec, t, report: bool = True) -> Decomposition:
    """Full lightlike decomposition at parameter point ``t``."""
    fj = frame_jets(spec, t)
    return decompose_frame(spec, fj, report)


def decompose_frame(spec: ManifoldSpec, fj: FrameJets, report: bool = True) -> Decomposition:
    g = spec.metric
    B = fj.vectors
    coeffs = _radical_coefficients(g, B)
    xi = coeffs @ B if coeffs.shape[0] else np.zeros((0, g.dim))
    stm, idx = screen_complement_indices(g, B, xi)
    d = _build(spec, fj.t, B, xi, stm.vectors, idx, None)
    d = dataclasses.replace(d, point=fj.point)
    if report:
        d = dataclasses.replace(d, generic=screen_generic_report(spec, d))
    return d


def decompose_anchored(spec: ManifoldSpec, t, anchor: Decomposition) -> Decomposition:
    """Decomposition at ``t`` whose bases continue those of ``anchor``.

    The radical basis is the projection of the anchor's radical basis onto
    the radical at ``t``; the screen reuses the anchor's accepted frame
    indices; S(TM^perp) vectors are projections of the anchor's onto the
    new screen transversal space.  ltr(TM) is then fixed by the pairing.
    """
    g = spec.metric
    t = np.asarray(t, dtype=float)
    B = frame_vectors(spec, t)
    norms = np.linalg.norm(B, axis=1)
    K = kernel_basis(gram(g, B / norms[:, None]))
    if K.shape[0] != anchor.r:
        raise FrameDiscontinuity(f"radical rank changed from {anchor.r} to {K.shape[0]}")
    if anchor.r:
        rad_space = K @ (B / norms[:, None])
        P = projector(rad_space)
        xi = anchor.rad.vectors @ P
    else:
        P = np.zeros((g.dim, g.dim))
        xi = np.zeros((0, g.dim))
    S = B[list(anchor.screen_indices)] @ (np.eye(g.dim) - P) if anchor.screen_indices else np.zeros((0, g.dim))
    tmperp = orthogonal_space(g, B).vectors
    sp = orthonormal_rows(tmperp - tmperp @ P) if tmperp.shape[0] else tmperp
    if sp.shape[0] != anchor.stmperp.dim:
        raise FrameDiscontinuity("screen transversal rank changed")
    W = anchor.stmperp.vectors @ projector(sp) if sp.shape[0] else np.zeros((0, g.dim))
    d = _build(spec, t, B, xi, S, anchor.screen_indices, W)
    for name in ("tm", "rad", "stm", "stmperp", "ltr"):
        a, b = getattr(anchor, name), getattr(d, name)
        if a.dim and subspace_distance(a.vectors, b.vectors) > CONTINUITY_TOL:
            raise FrameDiscontinuity(f"{name} jumped between neighbouring points")
    return d


# --------------------------------------------------------------------------
# screen generic structure
# --------------------------------------------------------------------------


def _outside(J: np.ndarray, rows: np.ndarray) -> float:
    """max_i |J v_i - P(J v_i)| / |v_i| with P the projector onto span(rows)."""
    if rows.shape[0] == 0:
        return 0.0
    P = projector(rows)
    Jv = rows @ J.T
    res = Jv - Jv @ P
    return float(np.max(np.linalg.norm(res, axis=1) / np.linalg.norm(rows, axis=1)))


def _nice(coeffs: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Rows spanning span(coeffs @ basis), reduced so that basis vectors lying
    in the span are reproduced exactly (coefficients in basis coordinates)."""
    if coeffs.shape[0] == 0:
        return np.zeros((0, basis.shape[1]))
    return rref(coeffs) @ basis


def _unit(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(rows, axis=1)
    return rows / norms[:, None], norms


def _null_of(A: np.ndarray) -> np.ndarray:
    _, s, vh = np.linalg.svd(A, full_matrices=True)
    cutoff = RANK_TOL * max(1.0, s[0] if s.size else 0.0)
    return vh[int(np.sum(s > cutoff)):]


def _g_orth_coeffs(g: SignatureMetric, against: np.ndarray, within: np.ndarray) -> np.ndarray:
    """Coefficients c (in ``within`` coordinates) with c @ within g-orthogonal to ``against``."""
    an, _ = _unit(against)
    wn, wnorm = _unit(within)
    x = _null_of(cross_gram(g, an, wn))
    return x / wnorm[None, :]


def _intersection_coeffs(S: np.ndarray, J: np.ndarray) -> np.ndarray:
    """Coefficients a with a @ S in J(span S), i.e. a @ S = b @ (S J^T) for some b."""
    sn, snorm = _unit(S)
    x = _null_of(np.vstack([sn, -(sn @ J.T)]).T)
    a = x[:, : S.shape[0]]
    if a.shape[0] == 0:
        return a
    return orthonormal_rows(a) / snorm[None, :]


def screen_generic_report(spec: ManifoldSpec, decomp: Decomposition, tol: float = EXPAND_TOL) -> ScreenGenericReport:
    """Checks of Rad-invariance, B0 = J(S(TM)) cap S(TM), B', the (g3) flags and mu."""
    g = spec.metric
    J = spec.bronze.matrix
    n = g.dim
    S = decomp.stm.vectors
    W = decomp.stmperp.vectors
    rad_inv = _outside(J, decomp.rad.vectors)

    b0_rows = _nice(_intersection_coeffs(S, J), S) if S.shape[0] else np.zeros((0, n))
    b0 = SubspaceBasis(b0_rows, "B0") if b0_rows.shape[0] else SubspaceBasis.empty(n, "B0")
    b0_nondeg = True
    inter_res = 0.0
    if b0.dim:
        bn, _ = _unit(b0_rows)
        b0_nondeg = bool(np.min(np.abs(np.linalg.eigvalsh(gram(g, bn)))) > RANK_TOL)
        # defining property of the intersection: J(B0) in S(TM) and B0 in J(S(TM))
        Jb = bn @ J.T
        inter_res = float(np.max(np.linalg.norm(Jb - Jb @ projector(S), axis=1)))
        inter_res = max(inter_res, float(np.max(np.linalg.norm(bn - bn @ projector(S @ J.T), axis=1))))

    if b0.dim and S.shape[0]:
        bprime_rows = _nice(_g_orth_coeffs(g, b0_rows, S), S)
    else:
        bprime_rows = S.copy()
    bprime = SubspaceBasis(bprime_rows, "Bprime") if bprime_rows.shape[0] else SubspaceBasis.empty(n, "Bprime")

    not_in_stm = not_in_stmperp = False
    ws_rows, wl_max = [], 0.0
    for y in bprime_rows:
        jy = J @ y
        parts = decomp.expand(jy)
        scale = max(1.0, np.linalg.norm(jy))
        not_in_stm |= bool(np.linalg.norm(jy - parts.screen) > tol * scale)
        not_in_stmperp |= bool(np.linalg.norm(jy - parts.stmperp) > tol * scale)
        wl_max = max(wl_max, float(np.linalg.norm(parts.ltr) / scale))
        if np.linalg.norm(parts.stmperp) > tol * scale:
            ws_rows.append(parts.stmperp)
    if W.shape[0] and ws_rows:
        mu_rows = _nice(_g_orth_coeffs(g, np.array(ws_rows), W), W)
    else:
        mu_rows = W.copy()
    mu = SubspaceBasis(mu_rows, "mu") if mu_rows.shape[0] else SubspaceBasis.empty(n, "mu")

    proper = b0.dim > 0 and bprime.dim > 0
    g1 = rad_inv <= tol
    generic = bool(g1 and b0_nondeg and (bprime.dim == 0 or (not_in_stm and not_in_stmperp)))
    return ScreenGenericReport(
        rad_invariant=rad_inv,
        b0=b0,
        bprime=bprime,
        rad=decomp.rad,
        b0_nondegenerate=b0_nondeg,
        g3_not_in_stm=not_in_stm,
        g3_not_in_stmperp=not_in_stmperp,
        mu=mu,
        mu_invariant=_outside(J, mu_rows),
        ltr_invariant=_outside(J, decomp.ltr.vectors),
        b0_intersection_residual=inter_res,
        wl_bprime=wl_max,
        proper=proper,
        screen_generic=generic,
    )


def projections(X, report: ScreenGenericReport) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Components (J0 X, J1 X, Q X) of a tangent X along B0, Rad and B'."""
    X = np.asarray(X, dtype=float)
    blocks = [report.b0.vectors, report.rad.vectors, report.bprime.vectors]
    basis = np.vstack(blocks)
    c, *_ = np.linalg.lstsq(basis.T, X, rcond=None)
    if np.linalg.norm(basis.T @ c - X) > EXPAND_TOL * max(1.0, np.linalg.norm(X)):
        raise NotTangent("vector is not tangent to the submanifold")
    out, k = [], 0
    for blk in blocks:
        out.append(c[k:k + blk.shape[0]] @ blk if blk.shape[0] else np.zeros_like(X))
        k += blk.shape[0]
    return out[0], out[1], out[2]
