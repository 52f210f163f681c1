"""Single-phase proximal path-following.

The iterate starts exactly on a tilted central path: with
``zeta0 = grad f(x0) + (c + xi0)/t0`` and ``eta = 1``, the point ``x0`` solves

    min_x (1/t0) G(x) + f(x) - <zeta0, x>

so no centering phase is needed. Afterwards ``t`` shrinks by the constant
factor ``1 - sigma`` and each value of ``t`` gets one inexact proximal-Newton
step. The run stops once ``t * psi <= epsilon``, which bounds ``G(x) - G*``.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import barrier as _barrier
from . import prox as _prox
from . import subsolver as _sub
from .errors import InitializationError, InvalidInputError, NonConvergenceError, SubsolverFailure

log = logging.getLogger(__name__)

DEFAULT_BETA = 0.042231
DEFAULT_BETA_EXACT = 0.045864
BETA_MAX = 1.0 / 9.0
BETA_MAX_EXACT = 0.116764
T0_MARGIN = 1.25
NEIGHBORHOOD_CONST = 0.43
NEIGHBORHOOD_CONST_EXACT = 0.45

STATUS_CONVERGED = "converged"
STATUS_CAP = "iteration_cap"
STATUS_SUBSOLVER = "subsolver_failure"


# -- scalar formulas ---------------------------------------------------------

def a0(beta: float, n_nu: float) -> float:
    return (1.0 - beta) / ((3.0 + beta) * n_nu)


def kappa_max(a0_value: float) -> float:
    """Largest admissible ``||grad f(x0)||*`` for a given ``a0``."""
    a = a0_value
    # 1 - sqrt(4a^2 + 1) rewritten to avoid cancellation for small a
    return 0.5 * (2.0 * a - 4.0 * a * a / (1.0 + math.sqrt(4.0 * a * a + 1.0)))


def _check_beta(beta: float, exact_variant: bool) -> None:
    upper = BETA_MAX_EXACT if exact_variant else BETA_MAX
    if not 0.0 < beta <= upper:
        raise InvalidInputError(f"beta must lie in (0, {upper:g}] for this variant, got {beta!r}")


def c_beta(beta: float, exact_variant: bool = False) -> float:
    _check_beta(beta, exact_variant)
    k = (NEIGHBORHOOD_CONST_EXACT if exact_variant else NEIGHBORHOOD_CONST) * math.sqrt(beta)
    return 0.5 * (1.0 + k - math.sqrt((1.0 - k) ** 2 + 4.0 * beta))


def sigma_beta(c_beta_value: float, nu: float) -> float:
    return c_beta_value / ((1.0 + c_beta_value) * math.sqrt(nu))


def t0_lower_bound(c0: float, kappa: float, beta: float, n_nu: float) -> float:
    """Smallest ``t0`` keeping the tilt ``zeta0`` inside the admissible ball.

    ``c0 (1-kappa)(3+beta) n_nu / ((1-2kappa)(1-beta) - kappa(1-kappa)(3+beta) n_nu)``
    """
    if c0 == 0.0:
        return 0.0
    denom = (1.0 - 2.0 * kappa) * (1.0 - beta) - kappa * (1.0 - kappa) * (3.0 + beta) * n_nu
    if not denom > 0.0:
        raise InitializationError(
            f"kappa={kappa:.6g} is too large for beta={beta:g}: no admissible t0 exists")
    return c0 * (1.0 - kappa) * (3.0 + beta) * n_nu / denom


def m_hat0(kappa: float, c0: float, t0: float, n_nu: float) -> float:
    """Upper bound on ``n_nu * ||zeta0||*`` at the analytic center."""
    return n_nu * (1.0 - kappa) * (kappa + c0 / t0) / (1.0 - 2.0 * kappa)


def gammas(beta: float, m_hat: float, const: float = NEIGHBORHOOD_CONST) -> Tuple[float, float]:
    """Return ``(gamma1, gamma_hat0)``."""
    shift = m_hat / (1.0 - m_hat)
    scale = (1.0 - m_hat) / (1.0 - 2.0 * m_hat)
    return beta * scale + shift, const * math.sqrt(beta) * scale + shift


def psi_beta(nu: float, m_hat0: float, gamma_hat0: float, gamma1: float, delta: float) -> float:
    if gamma_hat0 >= 1.0:
        raise InitializationError(f"gamma_hat0={gamma_hat0:.6g} must be < 1")
    one = 1.0 - gamma_hat0
    return (nu + math.sqrt(nu) * gamma1 / one
            + gamma_hat0 / one**2 * (gamma_hat0 + gamma1 + delta)
            + 0.5 * delta * delta + m_hat0 * gamma1)


def k_max_bound(psi: float, t0: float, epsilon: float, sigma_beta: float) -> int:
    """Worst-case number of ``t`` reductions until ``t_k * psi <= epsilon``."""
    ratio = psi * t0 / epsilon
    if ratio <= 1.0:
        return 0
    return int(math.floor(math.log(ratio) / -math.log1p(-sigma_beta))) + 1


# -- configuration and records ----------------------------------------------

@dataclass
class SolverConfig:
    """Solver settings.

    ``subsolver`` picks the inner routine: ``"fista"`` always runs the
    accelerated method, ``"exact"`` requires a closed-form KKT solve (g zero
    or the diagonal-affine indicator) and ``"auto"`` uses the closed form for
    the diagonal-affine indicator only. ``f_star``/``f_rel_tol`` add an extra
    stop on relative objective error when a reference optimum is known.
    """

    beta: Optional[float] = None
    epsilon: float = 1e-3
    init_mode: str = "theoretical"
    t0: Optional[float] = None
    x0: Optional[np.ndarray] = None
    exact_variant: bool = False
    delta: Optional[float] = None
    max_iters: int = 100_000
    subsolver: str = "auto"
    f_star: Optional[float] = None
    f_rel_tol: Optional[float] = None

    def __post_init__(self):
        if self.beta is None:
            self.beta = DEFAULT_BETA_EXACT if self.exact_variant else DEFAULT_BETA
        _check_beta(self.beta, self.exact_variant)
        if not self.epsilon > 0:
            raise InvalidInputError("epsilon must be positive")
        if self.init_mode not in ("theoretical", "manual"):
            raise InvalidInputError("init_mode must be 'theoretical' or 'manual'")
        if self.init_mode == "manual" and (self.t0 is None or not self.t0 > 0):
            raise InvalidInputError("manual initialization needs a positive t0")
        if self.t0 is not None and not self.t0 > 0:
            raise InvalidInputError("t0 must be positive")
        if self.delta is not None and not self.delta > 0:
            raise InvalidInputError("delta must be positive")
        if self.max_iters < 1:
            raise InvalidInputError("max_iters must be positive")
        if self.subsolver not in ("auto", "fista", "exact"):
            raise InvalidInputError("subsolver must be 'auto', 'fista' or 'exact'")
        if (self.f_star is None) != (self.f_rel_tol is None):
            raise InvalidInputError("f_star and f_rel_tol must be given together")


@dataclass
class InitCertificate:
    mode: str
    x0: np.ndarray
    xi0: np.ndarray
    zeta0: np.ndarray
    eta: float
    nu: float
    n_nu: float
    beta: float
    kappa: float
    a0: float
    kappa_max: float
    c0: float
    t0: float
    t0_min: Optional[float]
    m_hat0: Optional[float]
    gamma1: float
    gamma_hat0: float
    delta: float
    c_beta: float
    sigma_beta: float
    psi: float
    eta_interval: Tuple[float, float]
    kappa_ok: bool
    m_hat0_ok: bool
    psi_theoretical: bool

    @property
    def theory_ok(self) -> bool:
        return self.kappa_ok and self.m_hat0_ok

    def flags(self) -> dict:
        return {
            "init_mode": self.mode,
            "theory_ok": self.theory_ok,
            "kappa_ok": self.kappa_ok,
            "m_hat0_ok": self.m_hat0_ok,
            "psi_theoretical": self.psi_theoretical,
        }


@dataclass
class TraceRecord:
    k: int
    t: float
    objective: float
    sub_iters: int
    gap_bound: float
    wall_ms: float


@dataclass
class SolveTrace:
    records: List[TraceRecord] = field(default_factory=list)
    status: Optional[str] = None

    def __len__(self):
        return len(self.records)


@dataclass
class PathState:
    k: int
    t: float
    x: np.ndarray
    objective: float


@dataclass
class SolveResult:
    x: np.ndarray
    objective: float
    trace: SolveTrace
    cert: InitCertificate
    status: str
    iterations: int
    t_final: float
    wall_ms: float
    damped_steps: int = 0
    failure: Optional[SubsolverFailure] = None


def composite_objective(problem, x) -> float:
    return float(problem.c @ x) + _prox.value(problem.g, x)


# -- initialization ----------------------------------------------------------

def _starting_point(problem, config: SolverConfig, kappa_target: float) -> np.ndarray:
    b = problem.barrier
    if config.x0 is not None:
        return np.asarray(config.x0, dtype=float).ravel().copy()
    center = _barrier.analytic_center(b)
    if center is not None or config.init_mode == "manual":
        return center if center is not None else _barrier.default_interior_point(b)
    try:
        return _barrier.newton_center(b, _barrier.default_interior_point(b), kappa_target)
    except NonConvergenceError as exc:
        raise InitializationError(
            "the barrier has no analytic center (unbounded domain); "
            "use manual initialization with an explicit t0") from exc


def init(problem, config: SolverConfig) -> InitCertificate:
    b = problem.barrier
    beta = config.beta
    nu, n_nu = b.nu, b.n_nu
    a0_v = a0(beta, n_nu)
    kmax = kappa_max(a0_v)
    theoretical = config.init_mode == "theoretical"

    x0 = _starting_point(problem, config, 0.5 * kmax)
    if x0.size != b.dimension:
        raise InvalidInputError(f"x0 has dimension {x0.size}, problem has {b.dimension}")
    if not _barrier.is_interior(b, x0):
        raise InitializationError("x0 is not in the interior of the barrier domain")
    if not math.isfinite(_prox.value(problem.g, x0)):
        raise InitializationError("x0 is not feasible for the nonsmooth term g")

    metric = _barrier.metric_at(b, x0)
    grad0 = _barrier.gradient(b, x0)
    kappa = _barrier.dual_norm(metric, grad0)
    kappa_ok = kappa < kmax
    if theoretical and not kappa_ok:
        raise InitializationError(
            f"||grad f(x0)||* = {kappa:.6g} exceeds the admissible {kmax:.6g}")

    xi0 = _prox.subgradient(problem.g, x0, problem.c, metric)
    c0 = _barrier.dual_norm(metric, problem.c + xi0)

    t0_min = t0_lower_bound(c0, kappa, beta, n_nu) if kappa_ok else None
    if config.t0 is not None:
        t0 = float(config.t0)
    elif t0_min is not None and t0_min > 0.0:
        t0 = T0_MARGIN * t0_min
    else:
        t0 = 1.0

    m_bound = (1.0 - beta) / (3.0 + beta)
    m_hat = m_hat0(kappa, c0, t0, n_nu) if kappa < 0.5 else None
    m_ok = m_hat is not None and m_hat < m_bound
    if theoretical and not m_ok:
        raise InitializationError(
            f"m_hat0={m_hat:.6g} must stay below {m_bound:.6g}; choose a larger t0"
            f" (at least {t0_min:.6g})")

    delta = config.delta if config.delta is not None else beta / 16.0
    cb = c_beta(beta, config.exact_variant)
    sigma = sigma_beta(cb, nu)
    if kappa_ok and m_ok:
        gamma1, gamma_hat0 = gammas(beta, m_hat)
        psi = psi_beta(nu, m_hat, gamma_hat0, gamma1, delta)
        psi_theoretical = True
    else:
        # outside the theory: fall back to the untilted constants
        gamma1, gamma_hat0 = gammas(beta, 0.0)
        psi = psi_beta(nu, 0.0, gamma_hat0, gamma1, delta)
        psi_theoretical = False
        log.warning("initialization violates the theoretical preconditions; "
                    "psi uses the untilted fallback %.6g", psi)

    zeta0 = grad0 + (problem.c + xi0) / t0
    zeta_norm = _barrier.dual_norm(metric, zeta0)
    half_width = beta * (1.0 - beta) / ((1.0 + beta) * zeta_norm) if zeta_norm > 0 else math.inf

    return InitCertificate(
        mode=config.init_mode, x0=x0, xi0=xi0, zeta0=zeta0, eta=1.0,
        nu=nu, n_nu=n_nu, beta=beta, kappa=kappa, a0=a0_v, kappa_max=kmax,
        c0=c0, t0=t0, t0_min=t0_min, m_hat0=m_hat, gamma1=gamma1,
        gamma_hat0=gamma_hat0, delta=delta, c_beta=cb, sigma_beta=sigma, psi=psi,
        eta_interval=(1.0 - half_width, 1.0 + half_width),
        kappa_ok=kappa_ok, m_hat0_ok=m_ok, psi_theoretical=psi_theoretical)


# -- iteration ---------------------------------------------------------------

def _use_exact(problem, config: SolverConfig) -> bool:
    kind = problem.g.kind
    if config.exact_variant or config.subsolver == "exact":
        if kind not in ("zero", "affine_diag"):
            raise InvalidInputError(
                f"the exact variant needs a closed-form subproblem (g zero or affine_diag), got {kind}")
        return True
    return config.subsolver == "auto" and kind == "affine_diag"


def step(problem, state: PathState, cert: InitCertificate, config: SolverConfig):
    """Shrink ``t`` once and take one inexact proximal-Newton step.

    Returns ``(new_state, record, damped)``. ``damped`` is true when the full
    step left the barrier domain and was shortened to ``1/(1 + ||d||_x)``;
    that only happens for initializations outside the theory.
    """
    start = time.perf_counter()
    b = problem.barrier
    t_next = state.t * (1.0 - cert.sigma_beta)
    model = _sub.build_model(b, state.x, cert.zeta0, cert.eta, problem.c, t_next, problem.g)
    if _use_exact(problem, config):
        z, gap, iters = _sub.solve_affine_exact(model), 0.0, 0
    else:
        z, gap, iters = _sub.solve(model, cert.delta, beta=cert.beta)

    damped = False
    if not _barrier.is_interior(b, z):
        d = z - state.x
        z = state.x + d / (1.0 + _barrier.local_norm(model.metric, d))
        damped = True
    obj = composite_objective(problem, z)
    wall_ms = 1e3 * (time.perf_counter() - start)
    record = TraceRecord(state.k + 1, t_next, obj, iters, gap, wall_ms)
    return PathState(state.k + 1, t_next, z, obj), record, damped


def solve(problem, config: Optional[SolverConfig] = None) -> SolveResult:
    config = config or SolverConfig()
    start = time.perf_counter()
    cert = init(problem, config)
    _use_exact(problem, config)  # validate before iterating
    cap = min(config.max_iters,
              k_max_bound(cert.psi, cert.t0, config.epsilon, cert.sigma_beta))

    state = PathState(0, cert.t0, cert.x0, composite_objective(problem, cert.x0))
    trace = SolveTrace()
    damped_steps = 0
    failure = None
    while True:
        if state.t * cert.psi <= config.epsilon:
            status = STATUS_CONVERGED
            break
        if config.f_star is not None:
            rel = abs(state.objective - config.f_star) / max(abs(config.f_star), 1e-300)
            if rel <= config.f_rel_tol:
                status = STATUS_CONVERGED
                break
        if state.k >= cap:
            status = STATUS_CAP
            break
        try:
            state, record, damped = step(problem, state, cert, config)
        except SubsolverFailure as exc:
            failure = exc
            status = STATUS_SUBSOLVER
            log.warning("stopping at k=%d: %s", state.k, exc)
            break
        damped_steps += damped
        trace.records.append(record)
    trace.status = status
    return SolveResult(
        x=state.x, objective=state.objective, trace=trace, cert=cert, status=status,
        iterations=state.k, t_final=state.t, wall_ms=1e3 * (time.perf_counter() - start),
        damped_steps=damped_steps, failure=failure)
