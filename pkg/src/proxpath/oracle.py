"""Reference solutions used to check the path-following solver.

Everything here takes a different computational route from the solver:
central points are found by damped proximal-Newton on the fixed-``t``
barrier problem, diagonal constraints are eliminated by restricting to the
free coordinates instead of a Schur complement, and nonsmooth subproblems use
plain (non-accelerated) proximal gradient with an exact ``eigvalsh`` step.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from . import barrier as _barrier
from . import prox as _prox
from . import symmetric as _sym
from .errors import NonConvergenceError

DEFAULT_TOL = 1e-10
# below this decrement, a non-decreasing step counts as the rounding floor
STAGNATION_LAMBDA = 1e-6


def lambda_distance(x, x_ref, b) -> float:
    """``||x - x_ref||`` measured in the barrier metric at ``x_ref``."""
    d = np.asarray(x, dtype=float) - np.asarray(x_ref, dtype=float)
    return math.sqrt(max(float(d @ barrier_hessian(b, x_ref) @ d), 0.0))


def _packed_basis(n: int) -> np.ndarray:
    """Rows are vec(B_i) for the orthonormal basis behind packed storage."""
    m = _sym.packed_size(n)
    E = np.zeros((m, n * n))
    for i in range(m):
        e = np.zeros(m)
        e[i] = 1.0
        E[i] = _sym.unpack_sym(e, n).ravel()
    return E


def barrier_hessian(b, x) -> np.ndarray:
    """Dense barrier Hessian; matrix kinds go through ``kron(Y, Y)``."""
    x = np.asarray(x, dtype=float)
    if b.kind == "box":
        return np.diag(1.0 / (x - b.lower) ** 2 + 1.0 / (b.upper - x) ** 2)
    if b.kind == "nonneg_orthant":
        return np.diag(1.0 / x**2)
    n = b.order
    X = _sym.unpack_sym(x, n)
    E = _packed_basis(n)
    Y = np.linalg.inv(X)
    K = np.kron(Y, Y)
    if b.kind == "matrix_interval":
        Z = np.linalg.inv(b.upper_matrix - X)
        K = K + np.kron(Z, Z)
    H = E @ K @ E.T
    return 0.5 * (H + H.T)


def _proxgrad_subproblem(H, r, x, g, t, iters=100_000, tol=1e-15):
    """min_d <r, d> + 0.5 d'Hd + g(x + d)/t by plain proximal gradient."""
    L = float(np.linalg.eigvalsh(H)[-1])
    z = _prox.prox_scaled(g, 1.0, x)
    for _ in range(iters):
        grad = r + H @ (z - x)
        z_new = _prox.prox_scaled(g, 1.0 / (t * L), z - grad / L)
        if np.max(np.abs(z_new - z)) <= tol * max(1.0, np.max(np.abs(z))):
            return z_new - x
        z = z_new
    return z - x


def newton_direction(problem, x, r, H, t):
    g = problem.g
    if g.kind == "zero":
        return -np.linalg.solve(H, r)
    sel = _prox.diag_selector(g)
    if g.kind == "affine_diag":
        pos, target = sel
        free = np.ones(x.size, dtype=bool)
        free[pos] = False
        d = np.zeros_like(x)
        d[pos] = target - x[pos]
        rhs = r[free] + H[np.ix_(free, ~free)] @ d[~free]
        d[free] = -np.linalg.solve(H[np.ix_(free, free)], rhs)
        return d
    return _proxgrad_subproblem(H, r, x, g, t)


def solve_central_point(problem, zeta0, eta, t, tol=DEFAULT_TOL, x_start=None, max_iter=500):
    """Minimizer of ``(1/t)(<c,x> + g(x)) + f(x) - eta <zeta0, x>``.

    Damped steps ``x + d/(1 + lambda)`` are used while the decrement
    ``lambda = ||d||_x`` exceeds 0.2; full steps afterwards. Returns once the
    decrement is at most ``tol``, or once it stops decreasing below
    ``STAGNATION_LAMBDA`` (the Hessian grows like ``1/t^2`` on the SDP cone, so
    rounding sets a floor on the attainable decrement for tiny ``t``).
    """
    b = problem.barrier
    if x_start is None:
        x_start = _barrier.default_interior_point(b)
    x = _prox.prox_scaled(problem.g, 1.0, np.asarray(x_start, dtype=float))
    zeta0 = np.zeros_like(x) if zeta0 is None else np.asarray(zeta0, dtype=float)
    lam_prev = math.inf
    for _ in range(max_iter):
        r = _barrier.gradient(b, x) - eta * zeta0 + problem.c / t
        H = barrier_hessian(b, x)
        d = newton_direction(problem, x, r, H, t)
        lam = math.sqrt(max(float(d @ H @ d), 0.0))
        if lam <= tol or (lam < STAGNATION_LAMBDA and lam >= lam_prev):
            return x + d
        lam_prev = lam
        x = x + (d if lam < 0.2 else d / (1.0 + lam))
    raise NonConvergenceError(f"central point not found within {max_iter} Newton steps")


def central_path_limit(problem, t_final=1e-7, shrink=0.1, tol=1e-9, x_start=None):
    """Follow the untilted central path down to ``t_final``.

    The returned point is within ``nu * t_final`` of optimal in objective.
    Much smaller ``t_final`` drives SDP iterates to numerically singular
    matrices.
    """
    x = x_start
    t = 1.0
    while True:
        x = solve_central_point(problem, None, 0.0, t, tol=tol, x_start=x)
        if t <= t_final:
            return x
        t = max(t * shrink, t_final)


def brute_force_maxcut(L, chunk: int = 1 << 16) -> float:
    """Exact max cut ``max 1/4 s'Ls`` over sign vectors, fixing ``s_0 = 1``."""
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    if n == 1:
        return 0.0
    m = n - 1
    best = -math.inf
    total = 1 << m
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        bits = ((idx[:, None] >> np.arange(m)) & 1).astype(float)
        S = np.hstack([np.ones((idx.size, 1)), 1.0 - 2.0 * bits])
        vals = np.einsum("ij,jk,ik->i", S, L, S, optimize=True)
        best = max(best, float(vals.max()))
    return 0.25 * best


def brute_force_maxcut_small(L) -> float:
    """Same as :func:`brute_force_maxcut` by explicit enumeration (tiny graphs)."""
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    return max(0.25 * float(np.array(s) @ L @ np.array(s))
               for s in itertools.product((1.0, -1.0), repeat=n))


def complete_graph_maxcut_sdp(n: int) -> float:
    """SDP optimum for K_n in minimization form.

    By symmetry the optimal X has every off-diagonal entry equal to
    ``-1/(n-1)``, giving ``1/4 <L, X> = n^2/4``.
    """
    return -0.25 * n * n


def model_minimizer(model, iters: int = 100_000) -> np.ndarray:
    """Minimizer of a subsolver ``QuadraticModel`` by plain proximal gradient."""
    H = model.metric.hessian
    return model.anchor + _proxgrad_subproblem(H, model.h, model.anchor, model.g, model.t,
                                               iters=iters)
