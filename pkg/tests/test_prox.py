import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import property_checks as pc
from proxpath import barrier as B
from proxpath import prox as P
from proxpath.errors import InvalidInputError
from proxpath.symmetric import pack_sym, unpack_sym


def test_values():
    assert P.value(P.l1(2), [1, -2]) == 3.0
    assert P.value(P.l1(2, 0.5), [1, -2]) == 1.5
    assert P.value(P.affine_diag(3), pack_sym(np.eye(3))) == 0.0
    assert P.value(P.affine_diag(3), pack_sym(2 * np.eye(3))) == math.inf
    assert P.value(P.zero(2), [5, 6]) == 0.0


def test_elliptope_value_checks_floor():
    g = P.elliptope_k(2, 4)
    ok = pack_sym(np.array([[1.0, -0.3], [-0.3, 1.0]]))
    bad = pack_sym(np.array([[1.0, -0.4], [-0.4, 1.0]]))
    assert P.value(g, ok) == 0.0
    assert P.value(g, bad) == math.inf


def test_soft_threshold():
    np.testing.assert_allclose(P.prox_scaled(P.l1(3), 1.0, [2, -0.5, 0]), [1, 0, 0])


def test_affine_diag_projection():
    X = np.array([[3.0, 0.7], [0.7, -1.0]])
    out = unpack_sym(P.prox_scaled(P.affine_diag(2), 0.3, pack_sym(X)))
    np.testing.assert_allclose(out, [[1.0, 0.7], [0.7, 1.0]])


def test_elliptope_projection():
    X = np.array([[0.2, -0.6, 0.1], [-0.6, 5.0, 2.0], [0.1, 2.0, 1.0]])
    out = unpack_sym(P.prox_scaled(P.elliptope_k(3, 4), 1.0, pack_sym(X)))
    assert out[0, 1] == pytest.approx(-1.0 / 3.0)
    np.testing.assert_allclose(np.diag(out), 1.0)
    assert out[0, 2] == pytest.approx(0.1)
    assert out[1, 2] == pytest.approx(2.0)


def test_box_indicator_clips():
    g = P.box_indicator([0, 0], [1, 2])
    np.testing.assert_allclose(P.prox_scaled(g, 7.0, [-1, 5]), [0, 2])


def test_bad_arguments():
    with pytest.raises(InvalidInputError):
        P.prox_scaled(P.l1(2), -1.0, [0, 0])
    with pytest.raises(InvalidInputError):
        P.prox_scaled(P.l1(2), 1.0, [0, 0, 0])
    with pytest.raises(InvalidInputError):
        P.elliptope_k(3, 1)


def _indicators():
    return st.sampled_from([
        P.affine_diag(3), P.elliptope_k(3, 2), P.elliptope_k(3, 4),
        P.box_indicator([-1, 0, 0, 0, -2, 0], [1, 1, 2, 1, 0, 3]),
    ])


vec6 = arrays(np.float64, 6, elements=st.floats(-50, 50, allow_nan=False))
taus = st.floats(1e-6, 1e6)


@settings(max_examples=150, deadline=None)
@given(g=_indicators(), u=vec6, tau=taus)
def test_projection_idempotent(g, u, tau):
    once = P.prox_scaled(g, tau, u)
    np.testing.assert_array_equal(P.prox_scaled(g, tau, once), once)


@settings(max_examples=150, deadline=None)
@given(g=_indicators(), u=vec6, t1=taus, t2=taus)
def test_projection_tau_independent(g, u, t1, t2):
    np.testing.assert_array_equal(P.prox_scaled(g, t1, u), P.prox_scaled(g, t2, u))


@settings(max_examples=150, deadline=None)
@given(u=arrays(np.float64, 4, elements=st.floats(-10, 10)), tau=st.floats(1e-3, 10))
def test_soft_threshold_optimality(u, tau):
    # v minimizes tau|v| + (v-u)^2/2 iff u - v is in tau * subdifferential of |.| at v
    v = P.prox_scaled(P.l1(4), tau, u)
    r = u - v
    nz = v != 0
    np.testing.assert_allclose(r[nz], tau * np.sign(v[nz]), atol=1e-12)
    assert np.all(np.abs(r[~nz]) <= tau + 1e-12)


def test_generalized_prox_identity_metric():
    rng = np.random.default_rng(0)
    M = B.MetricFactor.from_matrix(np.eye(3))
    for g in (P.l1(3, 0.7), P.affine_diag(2), P.box_indicator([0, 0, 0], [1, 1, 1])):
        u = rng.standard_normal(3)
        np.testing.assert_allclose(P.generalized_prox(g, u, M, tol=1e-9),
                                   P.prox_scaled(g, 1.0, u), atol=1e-8)


def test_generalized_prox_zero_returns_input():
    rng = np.random.default_rng(1)
    M = B.MetricFactor.from_matrix(pc.random_spd(rng, 4))
    u = rng.standard_normal(4)
    np.testing.assert_allclose(P.generalized_prox(P.zero(4), u, M), u, atol=1e-10)


def test_generalized_prox_l1_diagonal_metric():
    M = B.MetricFactor(np.zeros(2), diag=np.array([2.0, 2.0]))
    z = P.generalized_prox(P.l1(2), np.array([2.0, 0.0]), M, tol=1e-10)
    np.testing.assert_allclose(z, [1.5, 0.0], atol=1e-9)
    grid = np.linspace(-1, 3, 400001)
    obj = np.abs(grid) + (grid - 2.0) ** 2
    assert z[0] == pytest.approx(grid[np.argmin(obj)], abs=2e-5)


def test_l1_subgradient():
    xi = P.subgradient(P.l1(3, 2.0), np.array([1.0, -3.0, 0.0]))
    np.testing.assert_array_equal(xi, [2.0, -2.0, 0.0])


def test_affine_diag_subgradient_minimizes_dual_norm():
    # at X = I the barrier metric is identity on packed coordinates, so the
    # best diagonal multiplier cancels the diagonal of c exactly
    n = 3
    b = B.logdet(n)
    x = pack_sym(np.eye(n))
    M = B.metric_at(b, x)
    C = np.array([[1.0, 2.0, 0.0], [2.0, -3.0, 1.0], [0.0, 1.0, 0.5]])
    c = pack_sym(C)
    xi = P.subgradient(P.affine_diag(n), x, c, M)
    np.testing.assert_allclose(unpack_sym(c + xi), C - np.diag(np.diag(C)), atol=1e-12)


@pytest.mark.parametrize("name,check", [
    ("cocoercive", pc.check_prox_cocoercive),
    ("nonexpansive", pc.check_prox_nonexpansive),
])
def test_metric_prox_properties(name, check):
    fails = check()
    assert not fails, "\n".join(fails[:5])
