import numpy as np
import pytest

from nullframe.semilinalg import SignatureMetric
from nullframe.structure import (
    SIGMA_CONJ,
    BronzeStructure,
    LMParams,
    StructureError,
    bronze_eigen_residual,
    is_bronze_root,
    theta,
    verify_bronze,
    verify_compatibility,
)
from oracles import SIGMA


def _block_structure():
    J = np.zeros((4, 4))
    J[0, 0] = SIGMA
    J[1, 1] = SIGMA_CONJ
    J[2:, 2:] = [[3, 1], [1, 0]]
    return J


def test_bronze_roots():
    assert is_bronze_root(SIGMA) and is_bronze_root(3 - SIGMA)
    assert not is_bronze_root(1.0)
    assert SIGMA**2 == pytest.approx(3 * SIGMA + 1)


def test_block_structure_is_bronze():
    J = _block_structure()
    assert verify_bronze(J) < 1e-12
    assert bronze_eigen_residual(J) < 1e-12


def test_not_bronze():
    assert verify_bronze(np.eye(3)) > 1.0


def test_compatibility_needs_matching_signs():
    J = _block_structure()
    ok = SignatureMetric.from_timelike(4, [0])
    sym, cons = verify_compatibility(J, ok)
    assert sym < 1e-12 and cons < 1e-12
    mixed = SignatureMetric.from_timelike(4, [2])  # the 2x2 block straddles a sign change
    sym, _ = verify_compatibility(J, mixed)
    assert sym > 0.5


def test_structure_rejects_non_square():
    with pytest.raises(StructureError):
        BronzeStructure(np.zeros((2, 3)))


def test_lm_params():
    g = SignatureMetric.from_timelike(3, [0])
    with pytest.raises(StructureError):
        LMParams(0.0, 0.0, [0, 1, 0])
    lm = LMParams(1.0, 2.0, [0.0, 0.6, 0.8])
    lm.check_unit(g)
    with pytest.raises(StructureError):
        LMParams(1.0, 0.0, [1.0, 0.0, 0.0]).check_unit(g)
    assert theta([0, 1, 0], lm, g) == pytest.approx(0.6)
    assert lm.with_lm(-1, 0.5).l == -1.0
