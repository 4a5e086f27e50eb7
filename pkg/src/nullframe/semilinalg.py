"""Linear algebra for a flat ambient space with a diagonal +-1 metric.

Vectors are plain 1-D numpy arrays of ambient components.  A
:class:`SubspaceBasis` stores its vectors as the rows of a 2-D array.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

RANK_TOL = 1e-9

SUBSPACE_LABELS = frozenset(
    {"TM", "RadTM", "STM", "TMperp", "STMperp", "ltrTM", "B0", "Bprime", "mu", "ambient", "other"}
)


class LinalgError(ValueError):
    pass


class DimensionMismatch(LinalgError):
    pass


class NoNondegenerateComplement(LinalgError):
    pass


class SingularPairing(LinalgError):
    pass


class NoConsistentSignature(LinalgError):
    pass


@dataclass(frozen=True)
class SignatureMetric:
    """Diagonal metric; ``eps[i]`` is the sign of coordinate ``i``."""

    eps: np.ndarray = field(repr=False)

    def __post_init__(self):
        eps = np.asarray(self.eps, dtype=float)
        if eps.ndim != 1 or eps.size == 0 or not np.all(np.abs(eps) == 1.0):
            raise ValueError("eps must be a non-empty vector of +1/-1 entries")
        q = int(np.sum(eps < 0))
        if not 1 <= q <= eps.size - 1:
            raise ValueError(f"index {q} outside 1..{eps.size - 1}")
        eps.setflags(write=False)
        object.__setattr__(self, "eps", eps)

    @classmethod
    def from_timelike(cls, dim: int, timelike) -> "SignatureMetric":
        """Metric with -1 at the given zero-based positions."""
        eps = np.ones(dim)
        for i in timelike:
            if not 0 <= i < dim:
                raise ValueError(f"timelike position {i} outside 0..{dim - 1}")
            eps[i] = -1.0
        return cls(eps)

    @property
    def dim(self) -> int:
        return self.eps.size

    @property
    def index(self) -> int:
        return int(np.sum(self.eps < 0))

    @property
    def timelike(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.eps < 0))

    def __eq__(self, other):
        return isinstance(other, SignatureMetric) and np.array_equal(self.eps, other.eps)

    def __hash__(self):
        return hash(self.timelike + (self.dim,))

    def __repr__(self):
        return f"SignatureMetric(dim={self.dim}, timelike={self.timelike})"


@dataclass(frozen=True)
class SubspaceBasis:
    vectors: np.ndarray = field(repr=False)  # shape (k, n)
    label: str = "other"

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=float)
        if v.ndim == 1:
            v = v.reshape(1, -1) if v.size else v.reshape(0, 0)
        if v.ndim != 2:
            raise ValueError("basis vectors must form a 2-D array")
        if self.label not in SUBSPACE_LABELS:
            raise ValueError(f"unknown subspace label {self.label!r}")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @classmethod
    def empty(cls, n: int, label: str = "other") -> "SubspaceBasis":
        return cls(np.zeros((0, n)), label)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return self.dim

    def __iter__(self):
        return iter(self.vectors)

    def __getitem__(self, i):
        return self.vectors[i]

    def relabel(self, label: str) -> "SubspaceBasis":
        return SubspaceBasis(self.vectors, label)

    def is_independent(self, tol: float = RANK_TOL) -> bool:
        if self.dim == 0:
            return True
        s = np.linalg.svd(_normalized_rows(self.vectors), compute_uv=False)
        return s[-1] > tol


def _rows(x, n: int | None = None) -> np.ndarray:
    if isinstance(x, SubspaceBasis):
        a = x.vectors
    else:
        a = np.asarray(x, dtype=float)
        if a.ndim == 1:
            a = a.reshape(1, -1)
    if n is not None and a.size and a.shape[1] != n:
        raise DimensionMismatch(f"vectors of length {a.shape[1]} in a {n}-dimensional space")
    if a.size == 0:
        return np.zeros((0, n if n is not None else (a.shape[1] if a.ndim == 2 else 0)))
    return a


def _normalized_rows(a: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(a, axis=1)
    norms[norms == 0.0] = 1.0
    return a / norms[:, None]


def inner(g: SignatureMetric, u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != (g.dim,) or v.shape != (g.dim,):
        raise DimensionMismatch(f"expected vectors of length {g.dim}, got {u.shape} and {v.shape}")
    return float(np.sum(g.eps * u * v))


def cross_gram(g: SignatureMetric, a, b) -> np.ndarray:
    a = _rows(a, g.dim)
    b = _rows(b, g.dim)
    return (a * g.eps) @ b.T


def gram(g: SignatureMetric, basis) -> np.ndarray:
    a = _rows(basis, g.dim)
    if a.shape[0] == 0:
        raise ValueError("gram of an empty basis")
    G = (a * g.eps) @ a.T
    return 0.5 * (G + G.T)


def kernel_basis(G, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal rows spanning the null space of the symmetric matrix ``G``.

    A singular value counts as zero when it is below ``tol * max(1, s_max)``.
    """
    G = np.asarray(G, dtype=float)
    if G.size == 0:
        return np.zeros((0, G.shape[1] if G.ndim == 2 else 0))
    return _null_rows(G, tol)


def _null_rows(A: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal rows spanning {x : A x = 0} for a rectangular ``A``."""
    k = A.shape[1]
    if A.shape[0] == 0:
        return np.eye(k)
    _, s, vh = np.linalg.svd(A, full_matrices=True)
    cutoff = tol * max(1.0, s[0] if s.size else 0.0)
    rank = int(np.sum(s > cutoff))
    return vh[rank:].copy()


def rank(vectors, tol: float = RANK_TOL) -> int:
    a = _rows(vectors)
    if a.shape[0] == 0:
        return 0
    s = np.linalg.svd(_normalized_rows(a), compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


def orthonormal_rows(vectors, tol: float = RANK_TOL) -> np.ndarray:
    """Euclidean orthonormal rows spanning the row space of ``vectors``."""
    a = _rows(vectors)
    if a.shape[0] == 0:
        return a
    u, s, vh = np.linalg.svd(_normalized_rows(a), full_matrices=False)
    r = int(np.sum(s > tol * max(1.0, s[0])))
    return vh[:r]


def projector(vectors) -> np.ndarray:
    """Euclidean orthogonal projector onto the span of ``vectors``."""
    a = _rows(vectors)
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.zeros((n, n))
    q = orthonormal_rows(a)
    return q.T @ q


def subspace_distance(a, b) -> float:
    """Spectral norm of the difference of Euclidean projectors (0 when equal)."""
    pa = projector(a)
    pb = projector(b)
    if pa.shape != pb.shape:
        raise DimensionMismatch("subspaces live in different spaces")
    if not pa.size:
        return 0.0
    return float(np.linalg.norm(pa - pb, 2))


def rref(coeffs: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Reduced row echelon form of a full-row-rank matrix (partial pivoting)."""
    a = np.array(coeffs, dtype=float)
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(a[r:, c])))
        if abs(a[p, c]) <= tol:
            continue
        a[[r, p]] = a[[p, r]]
        a[r] /= a[r, c]
        for i in range(rows):
            if i != r:
                a[i] -= a[i, c] * a[r]
        r += 1
    return a[:r]


def orthogonal_space(g: SignatureMetric, basis, within=None, label: str = "other") -> SubspaceBasis:
    """Basis of {v in ``within`` : <v, b> = 0 for every b in ``basis``}.

    ``within`` defaults to the whole ambient space (standard frame).
    """
    b = _rows(basis, g.dim)
    w = np.eye(g.dim) if within is None or (isinstance(within, str) and within == "ambient") else _rows(within, g.dim)
    if b.shape[0] == 0:
        return SubspaceBasis(w.copy(), label)
    if w.shape[0] == 0:
        return SubspaceBasis.empty(g.dim, label)
    # coefficients c with sum_k c_k <w_k, b_j> = 0 for all j
    wn = _normalized_rows(w)
    C = cross_gram(g, _normalized_rows(b), wn)
    null = _null_rows(C)
    return SubspaceBasis(null @ wn, label)


def _min_abs_eig(G: np.ndarray) -> float:
    if G.size == 0:
        return np.inf
    return float(np.min(np.abs(np.linalg.eigvalsh(0.5 * (G + G.T)))))


def screen_complement(g: SignatureMetric, tm, rad, label: str = "STM", tol: float = RANK_TOL) -> SubspaceBasis:
    """Non-degenerate complement of ``rad`` inside ``tm``.

    Greedy over the vectors of ``tm`` in the given order: a vector is accepted
    when it is independent of rad plus the accepted ones and the partial Gram
    stays non-degenerate.  Accepted vectors are returned with their Euclidean
    component along ``rad`` removed, so the complement is the unique subspace
    of ``tm`` Euclidean-orthogonal to ``rad`` (reproducible across points).
    """
    return screen_complement_indices(g, tm, rad, label, tol)[0]


def screen_complement_indices(g: SignatureMetric, tm, rad, label: str = "STM",
                              tol: float = RANK_TOL) -> tuple[SubspaceBasis, tuple[int, ...]]:
    """:func:`screen_complement` plus the indices of the accepted ``tm`` vectors."""
    t = _rows(tm, g.dim)
    r = _rows(rad, g.dim)
    if r.shape[0]:
        reproduced = t.T @ np.linalg.lstsq(t.T, r.T, rcond=None)[0]
        if np.max(np.abs(reproduced.T - r)) > 1e-8 * max(1.0, np.max(np.abs(r))):
            raise NoNondegenerateComplement("radical is not contained in the given space")
    p_rad = projector(r)
    target = rank(t, tol) - rank(r, tol)
    accepted: list[np.ndarray] = []
    indices: list[int] = []
    for i, v in enumerate(t):
        if len(accepted) == target:
            break
        cand = v - p_rad @ v
        if np.linalg.norm(cand) <= tol * max(1.0, np.linalg.norm(v)):
            continue
        trial = np.vstack(accepted + [cand])
        stack = np.vstack([r, trial]) if r.shape[0] else trial
        if rank(stack, tol) < stack.shape[0]:
            continue
        if _min_abs_eig(gram(g, _normalized_rows(trial))) <= tol:
            continue
        accepted.append(cand)
        indices.append(i)
    if len(accepted) != target:
        raise NoNondegenerateComplement(
            f"found a non-degenerate complement of dimension {len(accepted)}, need {target}"
        )
    if not accepted:
        return SubspaceBasis.empty(g.dim, label), ()
    return SubspaceBasis(np.vstack(accepted), label), tuple(indices)


def lightlike_transversal(g: SignatureMetric, rad, stm, stmperp, label: str = "ltrTM") -> SubspaceBasis:
    """Null vectors N_i with <N_i, xi_j> = delta_ij, <N_i, N_j> = 0, orthogonal to stm and stmperp.

    Candidates are taken from the part of (stm + stmperp)^perp that is
    Euclidean-orthogonal to rad; they are renormalised against the radical
    pairing and then null-corrected with N_i = V_i - 1/2 sum_k <V_i, V_k> xi_k.
    """
    xi = _rows(rad, g.dim)
    r = xi.shape[0]
    if r == 0:
        raise ValueError("lightlike_transversal needs a non-empty radical")
    s = np.vstack([_rows(stm, g.dim), _rows(stmperp, g.dim)])
    perp = orthogonal_space(g, s).vectors if s.shape[0] else np.eye(g.dim)
    # drop the radical directions (Euclidean) to get an r-dimensional candidate space
    p_rad = projector(xi)
    cand = orthonormal_rows(perp - perp @ p_rad)
    if cand.shape[0] != r:
        raise SingularPairing(f"candidate space has dimension {cand.shape[0]}, radical has {r}")
    P = cross_gram(g, cand, xi)  # P[i, j] = <V_i, xi_j>
    if np.linalg.svd(P, compute_uv=False)[-1] <= RANK_TOL * max(1.0, np.abs(P).max()):
        raise SingularPairing("pairing between candidates and radical is singular")
    V = np.linalg.solve(P, cand)  # rows V_i with <V_i, xi_j> = delta_ij
    VV = cross_gram(g, V, V)
    N = V - 0.5 * VV @ xi
    return SubspaceBasis(N, label)


def infer_signature(tm_vectors, claimed_rad_indices, index_q: int, rad_dim: int | None = None,
                    tol: float = 1e-9) -> list[tuple[int, ...]]:
    """All timelike position sets of size ``index_q`` consistent with the claimed radical.

    A sign assignment is consistent when every claimed radical vector (rows of
    ``tm_vectors`` selected by ``claimed_rad_indices``) lies in the kernel of
    the tangent Gram, and, if ``rad_dim`` is given, the kernel has exactly that
    dimension.  Positions are zero based.
    """
    tmv = _rows(tm_vectors)
    n = tmv.shape[1]
    idx = list(claimed_rad_indices or [])
    if not idx and rad_dim is None:
        raise ValueError("need claimed radical indices or a radical dimension")
    unit = _normalized_rows(tmv)
    found = []
    for combo in itertools.combinations(range(n), index_q):
        eps = np.ones(n)
        eps[list(combo)] = -1.0
        G = (unit * eps) @ unit.T
        if idx and np.max(np.abs(G[idx, :])) > tol:
            continue
        if rad_dim is not None and kernel_basis(G, tol).shape[0] != rad_dim:
            continue
        found.append(combo)
    if not found:
        raise NoConsistentSignature(
            f"no assignment of {index_q} timelike coordinates makes the claimed radical null"
        )
    return found


def expand(vectors: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares coefficients of ``v`` over the rows of ``vectors`` and the residual norm."""
    a = _rows(vectors)
    if a.shape[0] == 0:
        return np.zeros(0), float(np.linalg.norm(v))
    c = np.linalg.lstsq(a.T, v, rcond=None)[0]
    return c, float(np.linalg.norm(a.T @ c - v))
