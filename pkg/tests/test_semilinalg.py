import numpy as np
import pytest

from nullframe.semilinalg import (
    DimensionMismatch,
    NoConsistentSignature,
    NoNondegenerateComplement,
    SignatureMetric,
    SubspaceBasis,
    cross_gram,
    gram,
    infer_signature,
    inner,
    kernel_basis,
    lightlike_transversal,
    orthogonal_space,
    projector,
    rank,
    rref,
    screen_complement,
    subspace_distance,
)
from oracles import brute_force_signatures


@pytest.fixture
def minkowski4():
    return SignatureMetric.from_timelike(4, [0])


def test_metric_properties(minkowski4):
    assert minkowski4.dim == 4 and minkowski4.index == 1 and minkowski4.timelike == (0,)


@pytest.mark.parametrize("eps", [[1, 1, 1], [-1, -1], [1, 0.5, -1], []])
def test_metric_rejects_bad_signs(eps):
    with pytest.raises(ValueError):
        SignatureMetric(np.array(eps, dtype=float))


def test_inner_and_null_vector(minkowski4):
    assert inner(minkowski4, [1, 1, 0, 0], [1, 1, 0, 0]) == 0.0
    assert inner(minkowski4, [1, 0, 0, 0], [1, 0, 0, 0]) == -1.0
    with pytest.raises(DimensionMismatch):
        inner(minkowski4, [1, 0, 0], [1, 0, 0, 0])


def test_kernel_of_degenerate_gram(minkowski4):
    B = np.array([[1, 1, 0, 0], [0, 0, 1, 0]], dtype=float)
    K = kernel_basis(gram(minkowski4, B))
    assert K.shape == (1, 2)
    np.testing.assert_allclose(np.abs(K[0]), [1, 0], atol=1e-12)


def test_kernel_respects_scaled_tolerance():
    # the cutoff is tol * max(1, s_max): 1e-3 here
    assert kernel_basis(np.diag([1e6, 1e-2])).shape[0] == 0
    assert kernel_basis(np.diag([1e6, 1e-4])).shape[0] == 1
    assert kernel_basis(np.diag([1.0, 1e-8])).shape[0] == 0


def test_kernel_invariant_under_recombination():
    rng = np.random.default_rng(3)
    g = SignatureMetric.from_timelike(6, [0, 3])
    B = np.array([[1, 0, 0, 1, 0, 0], [0, 1, 0, 0, 0, 0], [1, 0, 1, 0, 0, 0], [0, 0, 0, 0, 1, 1]], float)
    ref = kernel_basis(gram(g, B)) @ B
    for _ in range(20):
        A = rng.standard_normal((4, 4)) + 4 * np.eye(4)
        B2 = A @ B
        K = kernel_basis(gram(g, B2)) @ B2
        assert subspace_distance(ref, K) < 1e-8


def test_rank_and_projector():
    V = np.array([[1, 0, 0], [2, 0, 0], [0, 1, 1]], float)
    assert rank(V) == 2
    P = projector(V)
    np.testing.assert_allclose(P @ P, P, atol=1e-12)
    np.testing.assert_allclose(np.trace(P), 2.0)


def test_rref():
    R = rref(np.array([[2.0, 4.0, 2.0], [1.0, 3.0, 0.0]]))
    np.testing.assert_allclose(R, [[1, 0, 3], [0, 1, -1]], atol=1e-12)


def test_orthogonal_space(minkowski4):
    S = orthogonal_space(minkowski4, [[1, 1, 0, 0]])
    assert S.dim == 3
    assert np.max(np.abs(cross_gram(minkowski4, S.vectors, [[1, 1, 0, 0]]))) < 1e-12


def test_screen_complement_and_transversal(minkowski4):
    xi = np.array([[1.0, 1.0, 0.0, 0.0]])
    tm = np.vstack([xi, [[0, 0, 1, 0]]])
    S = screen_complement(minkowski4, tm, xi)
    assert S.dim == 1
    perp = orthogonal_space(minkowski4, tm)
    Sperp = screen_complement(minkowski4, perp.vectors, xi, label="STMperp")
    N = lightlike_transversal(minkowski4, xi, S.vectors, Sperp.vectors)
    assert abs(inner(minkowski4, N.vectors[0], xi[0]) - 1.0) < 1e-12
    assert abs(inner(minkowski4, N.vectors[0], N.vectors[0])) < 1e-12
    assert np.max(np.abs(cross_gram(minkowski4, N.vectors, np.vstack([S.vectors, Sperp.vectors])))) < 1e-12


def test_transversal_pairing_for_two_dimensional_radical():
    g = SignatureMetric.from_timelike(6, [0, 1])
    xi = np.array([[1, 0, 0.6, 0.8, 0, 0], [0, 1, 0.8, -0.6, 0, 0]])
    tm = np.vstack([xi, [[0, 0, 0, 0, 1, 0]]])
    S = screen_complement(g, tm, xi)
    perp = orthogonal_space(g, tm)
    Sp = screen_complement(g, perp.vectors, xi, label="STMperp")
    N = lightlike_transversal(g, xi, S.vectors, Sp.vectors).vectors
    np.testing.assert_allclose(cross_gram(g, N, xi), np.eye(2), atol=1e-12)
    np.testing.assert_allclose(cross_gram(g, N, N), np.zeros((2, 2)), atol=1e-12)


def test_screen_complement_needs_radical_inside():
    g = SignatureMetric.from_timelike(3, [0])
    with pytest.raises(NoNondegenerateComplement):
        screen_complement(g, [[0, 0, 1]], [[1, 1, 0]])


def test_infer_signature_matches_brute_force():
    n, q = 6, 2
    g = SignatureMetric.from_timelike(n, [1, 4])
    xi = np.zeros(n)
    xi[[1, 2]] = 1.0  # null for timelike {1} paired with spacelike {2}
    others = np.array([[0, 0, 0, 1, 0, 0], [1, 0, 0, 0, 0, 0], [0, 0, 0, 0, 1, 1]], float)
    assert abs(inner(g, xi, xi)) < 1e-15
    B = np.vstack([xi, others])
    found = infer_signature(B, [0], q)
    assert found == brute_force_signatures(B, [0], q)
    assert (1, 4) in found


def test_infer_signature_none():
    B = np.array([[1.0, 0.0, 0.0]])
    with pytest.raises(NoConsistentSignature):
        infer_signature(B, [0], 1)


def test_subspace_basis_labels():
    with pytest.raises(ValueError):
        SubspaceBasis(np.eye(2), "nonsense")
    assert SubspaceBasis.empty(3).dim == 0
