import math

import numpy as np
import pytest

import property_checks as pc
from proxpath import barrier as B
from proxpath import oracle
from proxpath import prox as P
from proxpath import subsolver as S
from proxpath.errors import ConditioningError, InvalidInputError, SubsolverFailure
from proxpath.symmetric import pack_sym, unpack_sym


def _identity_model(h, g=None, t=1.0, anchor=None):
    h = np.asarray(h, dtype=float)
    anchor = np.zeros_like(h) if anchor is None else anchor
    M = B.MetricFactor(anchor, diag=np.ones(h.size))
    return S.QuadraticModel(anchor, M, h, g or P.zero(h.size), t)


def test_build_model_eta_zero_ignores_zeta():
    b = B.box([-1, -1], [1, 1])
    x = np.array([0.3, -0.2])
    c = np.array([1.0, -2.0])
    m = S.build_model(b, x, np.array([99.0, -99.0]), 0.0, c, 0.5, P.zero(2))
    np.testing.assert_allclose(m.h, B.gradient(b, x) + c / 0.5)


def test_build_model_stationary_anchor():
    b = B.box([-1, -2], [2, 1])
    x0 = np.array([0.4, -0.1])
    m = S.build_model(b, x0, B.gradient(b, x0), 1.0, np.zeros(2), 1.0, P.zero(2))
    np.testing.assert_allclose(m.h, 0.0, atol=1e-15)
    np.testing.assert_allclose(S.solve(m, 1e-6).z, x0)
    np.testing.assert_allclose(S.solve_affine_exact(m), x0)


def test_build_model_hand_assembled():
    b = B.box([-1, -1], [1, 1])
    x = np.array([0.5, -0.25])
    c = np.array([1.0, -2.0])
    zeta = np.array([0.3, 0.7])
    t = 0.8
    m = S.build_model(b, x, zeta, 1.0, c, t, P.zero(2))
    grad = -1.0 / (x + 1) + 1.0 / (1 - x)
    np.testing.assert_allclose(m.h, grad - zeta + c / t, rtol=1e-14)
    hess = 1.0 / (x + 1) ** 2 + 1.0 / (1 - x) ** 2
    np.testing.assert_allclose(m.metric.hessian, np.diag(hess), rtol=1e-14)


def test_build_model_rejects_nonpositive_t():
    b = B.box([-1], [1])
    with pytest.raises(InvalidInputError):
        S.build_model(b, np.zeros(1), np.zeros(1), 1.0, np.zeros(1), 0.0, P.zero(1))


def test_spectrum_bounds_examples():
    M = B.metric_at(B.box([-1, -1], [1, 1]), np.zeros(2))
    assert S.spectrum_bounds(M) == pytest.approx((2.0, 2.0))
    assert S.spectrum_bounds(B.MetricFactor.from_matrix(np.eye(3))) == pytest.approx((1.0, 1.0), rel=1e-6)
    L, mu = S.spectrum_bounds(B.MetricFactor.from_matrix(np.diag([1.0, 100.0])))
    assert L == pytest.approx(100.0, rel=0.01)
    assert mu == pytest.approx(1.0, rel=0.01)


def test_spectrum_bounds_bracket_dense_spectrum():
    rng = np.random.default_rng(7)
    for _ in range(30):
        A = pc.random_spd(rng, 8, cond=50.0)
        w = np.linalg.eigvalsh(A)
        L, mu = S.spectrum_bounds(B.MetricFactor.from_matrix(A))
        assert L >= w[-1] * (1 - 1e-10)
        assert L <= w[-1] * 1.01
        assert mu <= w[0] * (1 + 1e-6)
        assert mu >= w[0] * 0.99


def test_iteration_bound_formula():
    assert S.fista_iteration_bound(1.0, 0.04, 0.0025) == math.floor(math.log(0.04 * 2 / 0.0025)) + 1
    assert S.fista_iteration_bound(100.0, 1.0, 10.0) == 1 + math.floor(10 * math.log(10.1))


def test_solve_unconstrained_identity():
    sol = S.solve(_identity_model([1.0, -1.0]), 1e-6)
    np.testing.assert_allclose(sol.z, [-1.0, 1.0])
    assert sol.gap_bound == pytest.approx(0.0, abs=1e-30)


def test_solve_l1_identity_one_step():
    t = 2.0
    anchor = np.array([0.2, -0.4, 1.0])
    h = np.array([1.5, -0.3, 0.2])
    sol = S.solve(_identity_model(h, P.l1(3), t, anchor), 1e-8)
    u = anchor - h
    expected = np.sign(u) * np.maximum(np.abs(u) - 1 / t, 0)
    np.testing.assert_allclose(sol.z, expected, atol=1e-14)
    assert sol.iters == 1


def test_solve_random_box_model_against_oracle():
    rng = np.random.default_rng(11)
    delta = 1e-3
    for _ in range(10):
        m = pc.random_model(rng)
        lo = rng.uniform(-1.5, 0.0, 10)
        m = S.QuadraticModel(np.clip(m.anchor, lo, lo + 1), m.metric, m.h,
                             P.box_indicator(lo, lo + 1.0), m.t)
        sol = S.solve(m, delta)
        z_star = oracle.model_minimizer(m)
        assert B.local_norm(m.metric, sol.z - z_star) <= delta
        assert sol.gap_bound <= 0.5 * delta**2


def test_solve_certificate_bounds_true_gap():
    rng = np.random.default_rng(12)
    for _ in range(15):
        m = pc.random_model(rng)
        sol = S.solve(m, 1e-3)
        true_gap = m.objective(sol.z) - m.objective(oracle.model_minimizer(m))
        assert true_gap <= sol.gap_bound + 1e-12


def test_solve_cap_raises_with_best_iterate():
    rng = np.random.default_rng(13)
    m = pc.random_model(rng)
    while m.g.kind == "zero":
        m = pc.random_model(rng)
    with pytest.raises(SubsolverFailure) as info:
        S.solve(m, 1e-12, max_iter=2)
    assert info.value.z is not None
    assert info.value.iters == 2
    assert info.value.gap_bound > 0.5e-24


def test_solve_rejects_bad_delta():
    with pytest.raises(InvalidInputError):
        S.solve(_identity_model([1.0]), 0.0)


def test_exact_when_unconstrained_minimizer_feasible():
    # unconstrained minimizer anchor - h already has unit diagonal
    n = 2
    target = pack_sym(np.array([[1.0, 0.3], [0.3, 1.0]]))
    anchor = pack_sym(np.eye(n))
    h = anchor - target
    m = _identity_model(h, P.affine_diag(n), 1.0, anchor)
    np.testing.assert_allclose(S.solve_affine_exact(m), target, atol=1e-14)


def test_exact_identity_metric_projects():
    rng = np.random.default_rng(2)
    h = rng.standard_normal(6)
    anchor = pack_sym(np.eye(3))
    m = _identity_model(h, P.affine_diag(3), 1.0, anchor)
    expected = P.prox_scaled(P.affine_diag(3), 1.0, anchor - h)
    np.testing.assert_allclose(S.solve_affine_exact(m), expected, atol=1e-13)


def _maxcut_model(L, X, t):
    from proxpath import problems

    prob = problems.maxcut(L)
    x = pack_sym(X)
    return S.build_model(prob.barrier, x, np.zeros_like(x), 0.0, prob.c, t, prob.g)


def test_exact_matches_fista_on_2x2_maxcut():
    m = _maxcut_model(np.array([[1.0, -1.0], [-1.0, 1.0]]),
                      np.array([[1.0, -0.2], [-0.2, 1.0]]), 0.7)
    z_exact = S.solve_affine_exact(m)
    z_fista = S.solve(m, 1e-8).z
    np.testing.assert_allclose(z_fista, z_exact, atol=1e-6)


def test_exact_kkt_residual():
    L = np.array([[2.0, -1, -1], [-1, 2, -1], [-1, -1, 2]])
    X = np.array([[1.0, 0.1, -0.2], [0.1, 1.0, 0.3], [-0.2, 0.3, 1.0]])
    m = _maxcut_model(L, X, 0.3)
    z = S.solve_affine_exact(m)
    r = m.smooth_grad(z)
    # the residual must be a pure diagonal (normal cone of diag = e)
    R = unpack_sym(r)
    off = R - np.diag(np.diag(R))
    assert np.max(np.abs(off)) <= 1e-8
    np.testing.assert_allclose(np.diag(unpack_sym(z)), 1.0, atol=1e-14)


def test_exact_rejects_other_g():
    with pytest.raises(InvalidInputError):
        S.solve_affine_exact(_identity_model([1.0, 2.0], P.l1(2)))


def test_exact_singular_schur():
    # metric that cannot move the diagonal coordinate: M^{-1} restricted is zero
    class Degenerate(B.MetricFactor):
        def solve(self, v):
            v = np.asarray(v, dtype=float)
            out = np.array(v, copy=True)
            out[..., 0] = 0.0 if v.ndim == 1 else out[..., 0]
            if v.ndim == 2:
                out[0, :] = 0.0
            return out

    anchor = pack_sym(np.eye(1))
    M = Degenerate(anchor, diag=np.ones(1))
    m = S.QuadraticModel(anchor, M, np.array([1.0]), P.affine_diag(1), 1.0)
    with pytest.raises(ConditioningError):
        S.solve_affine_exact(m)
