"""Bronze structure J (J^2 = 3J + I), the (l, m) connection data, and the J-splits."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exprdsl import SIGMA
from .semilinalg import SignatureMetric, inner

SIGMA_CONJ = 3.0 - SIGMA  # the other root of x^2 - 3x - 1

BRONZE_TOL = 1e-12


class StructureError(ValueError):
    pass


class FrameIncomplete(StructureError):
    """A vector is not reproduced by the decomposition's frame."""


@dataclass(frozen=True)
class BronzeStructure:
    """Constant linear map on the ambient space satisfying J^2 = 3J + I."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        J = np.asarray(self.matrix, dtype=float)
        if J.ndim != 2 or J.shape[0] != J.shape[1]:
            raise StructureError("bronze matrix must be square")
        J.setflags(write=False)
        object.__setattr__(self, "matrix", J)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def apply_rows(self, rows: np.ndarray) -> np.ndarray:
        return rows @ self.matrix.T


def verify_bronze(J) -> float:
    """max |J J - 3 J - I|."""
    J = np.asarray(getattr(J, "matrix", J), dtype=float)
    if J.ndim != 2 or J.shape[0] != J.shape[1]:
        raise StructureError("bronze matrix must be square")
    return float(np.max(np.abs(J @ J - 3.0 * J - np.eye(J.shape[0]))))


def verify_compatibility(J, g: SignatureMetric, samples: int = 32, seed: int = 0) -> tuple[float, float]:
    """Residuals of g(JX, Y) = g(X, JY) on the standard basis and of
    g(JX, JY) = 3 g(X, JY) + g(X, Y) on seeded random pairs."""
    J = np.asarray(getattr(J, "matrix", J), dtype=float)
    if J.shape != (g.dim, g.dim):
        raise StructureError(f"bronze matrix shape {J.shape} does not match metric dimension {g.dim}")
    E = np.diag(g.eps)
    # (E J)[i, j] = g(e_i, J e_j); symmetric iff J is g-self-adjoint
    EJ = E @ J
    sym = float(np.max(np.abs(EJ - EJ.T)))
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        x, y = rng.standard_normal((2, g.dim))
        lhs = inner(g, J @ x, J @ y)
        rhs = 3.0 * inner(g, x, J @ y) + inner(g, x, y)
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    return sym, worst


def bronze_eigen_residual(J) -> float:
    """Distance of the spectrum of J from {sigma, 3 - sigma}."""
    J = np.asarray(getattr(J, "matrix", J), dtype=float)
    ev = np.linalg.eigvals(J)
    return float(np.max(np.minimum(np.abs(ev - SIGMA), np.abs(ev - SIGMA_CONJ))))


@dataclass(frozen=True)
class LMParams:
    """Parameters of the (l, m)-type connection and its unit spacelike field eta."""

    l: float
    m: float
    eta: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.l == 0.0 and self.m == 0.0:
            raise StructureError("(l, m) must not be (0, 0)")
        eta = np.asarray(self.eta, dtype=float)
        eta.setflags(write=False)
        object.__setattr__(self, "eta", eta)

    def check_unit(self, g: SignatureMetric, tol: float = 1e-9) -> None:
        if self.eta.shape != (g.dim,):
            raise StructureError(f"eta has {self.eta.size} components, ambient has {g.dim}")
        if abs(inner(g, self.eta, self.eta) - 1.0) > tol:
            raise StructureError("eta is not unit spacelike")

    def with_lm(self, l: float, m: float) -> "LMParams":
        return LMParams(float(l), float(m), self.eta)


def theta(X, lm: LMParams, g: SignatureMetric) -> float:
    return inner(g, X, lm.eta)


@dataclass(frozen=True)
class JSplit:
    fX: np.ndarray
    wlX: np.ndarray
    wsX: np.ndarray

    @property
    def wX(self) -> np.ndarray:
        return self.wlX + self.wsX


@dataclass(frozen=True)
class TransversalSplit:
    BV: np.ndarray
    CV: np.ndarray


def split_J_tangent(JX: np.ndarray, decomp) -> JSplit:
    """fX (tangential), w_l X (ltr) and w_s X (screen transversal) parts of JX."""
    parts = decomp.expand(JX)
    return JSplit(parts.tangent, parts.ltr, parts.stmperp)


def split_J_transversal(JV: np.ndarray, decomp) -> TransversalSplit:
    """BV (tangential) and CV (transversal) parts of JV."""
    parts = decomp.expand(JV)
    return TransversalSplit(parts.tangent, parts.ltr + parts.stmperp)


def is_bronze_root(x: float, tol: float = 1e-9) -> bool:
    return min(abs(x - SIGMA), abs(x - SIGMA_CONJ)) <= tol

