"""Strongly convex quadratic composite subproblems.

Each path-following step minimizes

    F(x) = <h, x - x_k> + 0.5 ||x - x_k||^2_{M_k} + (1/t) g(x)

to a certified objective gap. The generic route is FISTA with function-value
restart; equality-only problems also have a direct KKT solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import barrier as _barrier
from . import prox as _prox
from .barrier import MetricFactor
from .errors import ConditioningError, InvalidInputError, SubsolverFailure

POWER_MAX_ITER = 200
POWER_RTOL = 1e-8
CAP_FACTOR = 100


@dataclass(frozen=True, eq=False)
class QuadraticModel:
    anchor: np.ndarray
    metric: MetricFactor
    h: np.ndarray
    g: _prox.ProxFn
    t: float

    def smooth_value(self, x) -> float:
        d = x - self.anchor
        return float(self.h @ d) + 0.5 * self.metric.quadform(d)

    def smooth_grad(self, x) -> np.ndarray:
        return self.h + self.metric.apply(x - self.anchor)

    def objective(self, x) -> float:
        return self.smooth_value(x) + _prox.value(self.g, x) / self.t


class SpectrumBounds(NamedTuple):
    L: float
    mu: float


class SubSolution(NamedTuple):
    z: np.ndarray
    gap_bound: float
    iters: int


def build_model(b, x_k, zeta0, eta, c, t, g, metric: Optional[MetricFactor] = None) -> QuadraticModel:
    """Second-order model of the re-parameterized barrier problem at ``x_k``.

    The linear part is ``grad f(x_k) - eta*zeta0 + c/t``; the cost term is
    folded in so the model objective differs from ``Q + G/t`` by a constant.
    """
    if not t > 0:
        raise InvalidInputError("t must be positive")
    x_k = np.asarray(x_k, dtype=float)
    grad = _barrier.gradient(b, x_k)
    if metric is None:
        metric = _barrier.metric_at(b, x_k)
    h = grad + np.asarray(c, dtype=float) / t
    if eta != 0:
        h = h - eta * np.asarray(zeta0, dtype=float)
    return QuadraticModel(anchor=x_k, metric=metric, h=h, g=g, t=float(t))


def _power(apply, n: int, start: np.ndarray):
    v = start / np.linalg.norm(start)
    rho = 0.0
    w = apply(v)
    for _ in range(POWER_MAX_ITER):
        rho_new = float(v @ w)
        nw = np.linalg.norm(w)
        if not math.isfinite(nw) or nw == 0.0:
            raise ConditioningError("power iteration stagnated")
        v = w / nw
        w = apply(v)
        if abs(rho_new - rho) <= POWER_RTOL * abs(rho_new):
            rho = rho_new
            break
        rho = rho_new
    rho = float(v @ w)
    resid = float(np.linalg.norm(w - rho * v))
    return rho, resid


def _top_eigenvalue(apply, n: int) -> float:
    # A second, generic start guards against the all-ones vector being an
    # eigenvector of a symmetric structure with a non-extreme eigenvalue.
    starts = (np.ones(n), np.random.default_rng(0).standard_normal(n))
    best = -math.inf
    for s in starts:
        rho, resid = _power(apply, n, s)
        best = max(best, rho + resid)
    if not (math.isfinite(best) and best > 0.0):
        raise ConditioningError("power iteration produced a nonpositive eigenvalue")
    return best


def spectrum_bounds(M: MetricFactor) -> SpectrumBounds:
    """Upper bound on the largest and lower bound on the smallest eigenvalue."""
    if M.is_diagonal:
        return SpectrumBounds(float(M.diag.max()), float(M.diag.min()))
    n = M.dimension
    L = _top_eigenvalue(M.apply, n)
    inv_top = _top_eigenvalue(M.solve, n)
    mu = 1.0 / inv_top
    return SpectrumBounds(L, min(mu, L))


def fista_iteration_bound(kappa: float, beta: float, delta: float) -> int:
    """``floor(sqrt(kappa) * log(beta (1 + kappa) / delta)) + 1``."""
    arg = beta * (1.0 + kappa) / delta
    return int(math.floor(math.sqrt(kappa) * max(math.log(arg), 0.0))) + 1


def solve(model: QuadraticModel, delta: float, *, beta: Optional[float] = None,
          max_iter: Optional[int] = None) -> SubSolution:
    """FISTA with step ``1/L`` and function-value restart.

    Returns ``z`` with ``F(z) - F* <= gap_bound <= delta^2/2``. The certificate
    is ``||v||^2 / (2 mu)`` where ``v = (L I - H)(y - z)`` is an exact element
    of the subdifferential of F at the prox output ``z``.

    ``beta`` only enters the default iteration cap, ``100 * j_max``; it
    defaults to ``16 * delta``.
    """
    if not delta > 0:
        raise InvalidInputError("delta must be positive")
    target = 0.5 * delta * delta
    L, mu = spectrum_bounds(model.metric)
    if max_iter is None:
        b = 16.0 * delta if beta is None else beta
        max_iter = CAP_FACTOR * fista_iteration_bound(L / mu, b, delta)
    step = 1.0 / (model.t * L)
    M = model.metric

    x_prev = model.anchor.copy()
    y = x_prev
    theta = 1.0
    f_prev = math.inf
    best = (None, math.inf)
    for it in range(1, max_iter + 1):
        grad_y = model.smooth_grad(y)
        x = _prox.prox_scaled(model.g, step, y - grad_y / L)
        diff = y - x
        v = L * diff - M.apply(diff)
        gap = float(v @ v) / (2.0 * mu)
        if gap < best[1]:
            best = (x, gap)
        if gap <= target:
            return SubSolution(x, gap, it)
        f_x = model.objective(x)
        if f_x > f_prev:
            theta = 1.0
            y = x
        else:
            theta_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * theta * theta))
            y = x + ((theta - 1.0) / theta_next) * (x - x_prev)
            theta = theta_next
        x_prev = x
        f_prev = f_x
    raise SubsolverFailure(
        f"subsolver reached {max_iter} iterations with gap bound {best[1]:.3e} > {target:.3e}",
        z=best[0], gap_bound=best[1], iters=max_iter)


def solve_affine_exact(model: QuadraticModel) -> np.ndarray:
    """Exact minimizer when g is zero or the indicator of ``diag(X) = e``.

    Solves the unconstrained Newton system, then corrects with multipliers for
    the diagonal constraints through a Schur complement the size of the
    matrix order.
    """
    g = model.g
    M = model.metric
    base = model.anchor - M.solve(model.h)
    if g.kind == "zero":
        return base
    if g.kind != "affine_diag":
        raise InvalidInputError(f"exact solve needs zero or affine_diag g, got {g.kind}")
    pos, target = _prox.diag_selector(g)
    E = np.zeros((g.dimension, pos.size))
    E[pos, np.arange(pos.size)] = 1.0
    WE = M.solve(E)
    S = WE[pos, :]
    resid = base[pos] - target
    try:
        y = np.linalg.solve(S, resid)
    except np.linalg.LinAlgError as exc:
        raise ConditioningError("singular Schur complement in the diagonal-constrained step") from exc
    if not np.all(np.isfinite(y)):
        raise ConditioningError("non-finite multipliers in the diagonal-constrained step")
    z = base - WE @ y
    z[pos] = target
    return z
