import math

import numpy as np
import pytest

from nullframe.connection import (
    PointGeometry,
    ambient_derivative,
    constructed_partials,
    levi_civita_bundle,
    lm_bundle,
    nonmetricity,
    coordinate_fields,
    richardson,
    torsion_lm,
)
from nullframe.verify import builtin_example, toy_spec
from oracles import fd_jacobian, minimal11_hs44_at_anchor

ANCHOR = [0, 0, 0, 0, math.pi / 2, 0.0]


@pytest.fixture(scope="module")
def minimal_anchor():
    spec = builtin_example("minimal11")
    return spec, PointGeometry(spec, ANCHOR)


def test_richardson_on_polynomial():
    est, gap = richardson(lambda h: np.array([(1 + h) ** 3]), 1e-3)
    # the central difference of x^3 at 1 has error h^2, removed by one halving
    assert est[0] == pytest.approx(3.0, abs=1e-12)
    assert gap > 0


def test_constructed_partials_converge():
    spec = builtin_example("bronze16")
    geom = PointGeometry(spec, spec.sample_domain.mean(axis=1))
    fp = constructed_partials(spec, geom.decomp)
    assert fp.richardson_gap < 1e-6
    assert fp.ltr.shape == (2, 16, 8)


def test_ambient_derivative_of_frame_field(minimal_anchor):
    spec, geom = minimal_anchor
    t = geom.t
    coeffs = np.array([0.0, 0.0, 0.0, 1.0, 2.0])
    Y = geom.frame_field(coeffs)
    x = np.array([0.0, 0.0, 0.0, 1.0, 0.0])
    exact = ambient_derivative(spec, x, Y, geom=geom)
    fd = fd_jacobian(lambda s: coeffs @ geom.frame_at(s), t)[:, 4]
    np.testing.assert_allclose(exact, fd, atol=1e-8)


def test_minimal11_second_fundamental_form_at_anchor(minimal_anchor):
    spec, geom = minimal_anchor
    lc = levi_civita_bundle(spec, geom=geom)
    np.testing.assert_allclose(lc.hs[3, 3], minimal11_hs44_at_anchor(), atol=1e-12)
    np.testing.assert_allclose(lc.hs[4, 4], -minimal11_hs44_at_anchor(), atol=1e-12)
    assert np.max(np.abs(lc.hl)) < 1e-12
    assert np.max(np.abs(lc.hs[:3])) < 1e-12  # B1, B2, B3 are constant


def test_two_routes_agree(minimal_anchor):
    spec, geom = minimal_anchor
    for l, m in [(1, 1), (-1.3, 0.4), (0.0, 2.0)]:
        res = lm_bundle(spec, geom=geom, l=l, m=m)
        assert max(res.discrepancy.values()) < 1e-10


def test_torsion_and_nonmetricity(minimal_anchor):
    _, geom = minimal_anchor
    rng = np.random.default_rng(5)
    T, _, keep = coordinate_fields(geom)
    assert keep == [0, 1, 3, 4, 5]
    for _ in range(5):
        c, d = rng.standard_normal(T.shape[0]), rng.standard_normal(T.shape[0])
        lhs, rhs = torsion_lm(geom, c, d, 0.7, -1.1)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)
        x, y, z = (rng.standard_normal(5) for _ in range(3))
        lhs, rhs = nonmetricity(geom, x, y, z, 0.7, -1.1)
        assert lhs == pytest.approx(rhs, abs=1e-8)


def test_sphere_second_fundamental_form():
    spec = toy_spec("sphere", radius=2.0)
    geom = PointGeometry(spec, [1.1, 0.4])
    lc = levi_civita_bundle(spec, geom=geom)
    F = geom.fj.point
    G = geom.B @ geom.B.T
    # h(X, Y) = -g(X, Y) F / R^2 for a round sphere of radius R
    expected = -G[:, :, None] * F[None, None, :] / 4.0
    np.testing.assert_allclose(lc.hs, expected, atol=1e-12)
