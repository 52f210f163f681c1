"""Self-concordant barriers for the supported feasible sets.

Four kinds are supported, all acting on flat vectors:

``box``             ``-sum(log(u - x) + log(x - l))``, nu = 2p
``nonneg_orthant``  ``-sum(log x)``, nu = p, logarithmically homogeneous
``logdet``          ``-log det X`` on packed symmetric X, nu = n, homogeneous
``matrix_interval`` ``-log det X - log det(U - X)``, nu = 2n

Matrix kinds use the packed layout from :mod:`proxpath.symmetric`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
import scipy.linalg

from . import symmetric
from .errors import ConditioningError, DomainError, InvalidInputError, NonConvergenceError

BOUNDARY_TOL = 1e-12

KINDS = ("box", "nonneg_orthant", "logdet", "matrix_interval")


@dataclass(frozen=True, eq=False)
class Barrier:
    """Immutable descriptor of a nu-self-concordant barrier.

    ``dimension`` is always the flat (packed) dimension; ``order`` is the
    matrix order for the matrix kinds and ``None`` otherwise.
    """

    kind: str
    dimension: int
    nu: float
    log_homogeneous: bool
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    upper_matrix: Optional[np.ndarray] = None
    order: Optional[int] = None

    @property
    def n_nu(self) -> float:
        if self.log_homogeneous:
            return 1.0
        return self.nu + 2.0 * math.sqrt(self.nu)

    @property
    def is_matrix(self) -> bool:
        return self.kind in ("logdet", "matrix_interval")


def box(lower, upper) -> Barrier:
    lower = np.array(lower, dtype=float).ravel()
    upper = np.array(upper, dtype=float).ravel()
    if lower.shape != upper.shape or lower.size == 0:
        raise InvalidInputError("box bounds must be non-empty vectors of equal length")
    if np.any(lower >= upper):
        raise InvalidInputError("box requires lower < upper in every coordinate")
    lower.setflags(write=False)
    upper.setflags(write=False)
    p = lower.size
    return Barrier("box", p, 2.0 * p, False, lower=lower, upper=upper)


def nonneg_orthant(p: int) -> Barrier:
    if p < 1:
        raise InvalidInputError("dimension must be positive")
    return Barrier("nonneg_orthant", int(p), float(p), True)


def logdet(n: int) -> Barrier:
    if n < 1:
        raise InvalidInputError("matrix order must be positive")
    return Barrier("logdet", symmetric.packed_size(n), float(n), True, order=int(n))


def matrix_interval(U) -> Barrier:
    U = np.array(U, dtype=float)
    symmetric.pack_sym(U)  # validates symmetry
    if np.linalg.eigvalsh(U)[0] <= BOUNDARY_TOL:
        raise InvalidInputError("matrix interval bound U must be positive definite")
    U.setflags(write=False)
    n = U.shape[0]
    return Barrier("matrix_interval", symmetric.packed_size(n), 2.0 * n, False,
                   upper_matrix=U, order=n)


class BarrierEval(NamedTuple):
    value: float
    gradient: Optional[np.ndarray]


def _check_dim(b: Barrier, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.size != b.dimension:
        raise InvalidInputError(f"point has dimension {x.size}, barrier expects {b.dimension}")
    return x


def _spd_inverse(S: np.ndarray):
    """Return ``(logdet, inverse)`` of S, or ``None`` when S is not inside the cone."""
    w, V = np.linalg.eigh(S)
    if w[0] <= BOUNDARY_TOL:
        return None
    inv = (V / w) @ V.T
    return float(np.sum(np.log(w))), 0.5 * (inv + inv.T)


def _matrix_parts(b: Barrier, x: np.ndarray):
    X = symmetric.unpack_sym(x, b.order)
    pieces = []
    res = _spd_inverse(X)
    if res is None:
        return None
    pieces.append((res[0], res[1], -1.0))
    if b.kind == "matrix_interval":
        res = _spd_inverse(b.upper_matrix - X)
        if res is None:
            return None
        pieces.append((res[0], res[1], 1.0))
    return pieces


def evaluate(b: Barrier, x) -> BarrierEval:
    """Barrier value and gradient; value is ``+inf`` (gradient ``None``) outside."""
    x = _check_dim(b, x)
    if b.kind == "box":
        s_up = b.upper - x
        s_lo = x - b.lower
        if min(s_up.min(), s_lo.min()) <= BOUNDARY_TOL:
            return BarrierEval(math.inf, None)
        value = -float(np.sum(np.log(s_up)) + np.sum(np.log(s_lo)))
        return BarrierEval(value, 1.0 / s_up - 1.0 / s_lo)
    if b.kind == "nonneg_orthant":
        if x.min() <= BOUNDARY_TOL:
            return BarrierEval(math.inf, None)
        return BarrierEval(-float(np.sum(np.log(x))), -1.0 / x)
    pieces = _matrix_parts(b, x)
    if pieces is None:
        return BarrierEval(math.inf, None)
    value = 0.0
    grad = np.zeros(b.dimension)
    for ld, inv, sign in pieces:
        value -= ld
        # d/dX[-log det X] = -X^{-1};  d/dX[-log det(U - X)] = (U - X)^{-1}
        grad += sign * symmetric.pack_sym(inv)
    return BarrierEval(value, grad)


def value(b: Barrier, x) -> float:
    return evaluate(b, x).value


def gradient(b: Barrier, x) -> np.ndarray:
    ev = evaluate(b, x)
    if ev.gradient is None:
        raise DomainError("point is outside the interior of the barrier domain")
    return ev.gradient


def is_interior(b: Barrier, x) -> bool:
    return math.isfinite(evaluate(b, x).value)


def packed_congruence(Y: np.ndarray) -> np.ndarray:
    """Matrix of ``U -> Y U Y`` in packed coordinates (Y symmetric)."""
    n = Y.shape[0]
    r, c = symmetric.triu_indices(n)
    s = symmetric.offdiag_scale(n)
    H = Y[np.ix_(r, r)] * Y[np.ix_(c, c)] + Y[np.ix_(r, c)] * Y[np.ix_(c, r)]
    H *= 0.5 * np.outer(s, s)
    return H


class MetricFactor:
    """Factorized local metric ``grad^2 f(x)`` anchored at an interior point.

    Diagonal metrics (box, orthant) are kept as a vector; dense metrics keep a
    Cholesky factor. Instances are created per use and never mutated.
    """

    def __init__(self, anchor, *, diag=None, matrix=None):
        if (diag is None) == (matrix is None):
            raise InvalidInputError("give exactly one of diag= or matrix=")
        self.anchor = None if anchor is None else np.asarray(anchor, dtype=float)
        if diag is not None:
            diag = np.asarray(diag, dtype=float)
            if not np.all(np.isfinite(diag)) or diag.min() <= 0.0:
                raise ConditioningError("metric has a nonpositive or non-finite diagonal")
            self.diag = diag
            self.dimension = diag.size
            self._matrix = None
            self._chol = None
        else:
            matrix = np.asarray(matrix, dtype=float)
            if not np.all(np.isfinite(matrix)):
                raise ConditioningError("metric has non-finite entries")
            try:
                self._chol = scipy.linalg.cho_factor(matrix, lower=True, check_finite=False)
            except np.linalg.LinAlgError as exc:
                raise ConditioningError("metric is not numerically positive definite") from exc
            if np.min(np.abs(np.diag(self._chol[0]))) <= 1e-150:
                raise ConditioningError("metric Cholesky factor is singular")
            self.diag = None
            self._matrix = matrix
            self.dimension = matrix.shape[0]

    @classmethod
    def from_matrix(cls, H, anchor=None) -> "MetricFactor":
        return cls(anchor, matrix=H)

    @property
    def is_diagonal(self) -> bool:
        return self.diag is not None

    @property
    def hessian(self) -> np.ndarray:
        if self.diag is not None:
            return np.diag(self.diag)
        return self._matrix

    def _check(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float).ravel()
        if u.size != self.dimension:
            raise InvalidInputError(f"vector has dimension {u.size}, metric expects {self.dimension}")
        return u

    def apply(self, u) -> np.ndarray:
        u = self._check(u)
        if self.diag is not None:
            return self.diag * u
        return self._matrix @ u

    def solve(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.ndim == 1:
            v = self._check(v)
        if self.diag is not None:
            return v / (self.diag if v.ndim == 1 else self.diag[:, None])
        return scipy.linalg.cho_solve(self._chol, v, check_finite=False)

    def quadform(self, u) -> float:
        u = self._check(u)
        return float(u @ self.apply(u))


def metric_at(b: Barrier, x) -> MetricFactor:
    x = _check_dim(b, x)
    if b.kind == "box":
        s_up = b.upper - x
        s_lo = x - b.lower
        if min(s_up.min(), s_lo.min()) <= BOUNDARY_TOL:
            raise DomainError("point is on or outside the box boundary")
        return MetricFactor(x, diag=1.0 / s_up**2 + 1.0 / s_lo**2)
    if b.kind == "nonneg_orthant":
        if x.min() <= BOUNDARY_TOL:
            raise DomainError("point is on or outside the orthant boundary")
        return MetricFactor(x, diag=1.0 / x**2)
    pieces = _matrix_parts(b, x)
    if pieces is None:
        raise DomainError("matrix is not inside the barrier domain")
    H = sum(packed_congruence(inv) for _, inv, _ in pieces)
    return MetricFactor(x, matrix=H)


def local_norm(M: MetricFactor, u) -> float:
    return math.sqrt(max(M.quadform(u), 0.0))


def dual_norm(M: MetricFactor, v) -> float:
    v = M._check(v)
    return math.sqrt(max(float(v @ M.solve(v)), 0.0))


def analytic_center(b: Barrier) -> Optional[np.ndarray]:
    """Closed-form minimizer of the barrier, or ``None`` for unbounded domains."""
    if b.kind == "box":
        return 0.5 * (b.lower + b.upper)
    if b.kind == "matrix_interval":
        return symmetric.pack_sym(0.5 * b.upper_matrix)
    return None


def default_interior_point(b: Barrier) -> np.ndarray:
    """A canonical interior point: the center when known, else ones / identity."""
    center = analytic_center(b)
    if center is not None:
        return center
    if b.kind == "nonneg_orthant":
        return np.ones(b.dimension)
    return symmetric.pack_sym(np.eye(b.order))


def newton_center(b: Barrier, x_start, kappa_target: float, max_iter: int = 200) -> np.ndarray:
    """Approximate the analytic center by damped Newton steps on the barrier.

    Stops once ``||grad f(x)||*_x <= kappa_target``. Each step is
    ``x - H^{-1} g / (1 + lambda)`` with ``lambda`` the Newton decrement, which
    keeps the iterate inside the Dikin ellipsoid.
    """
    if not 0.0 < kappa_target < 0.5:
        raise InvalidInputError("kappa_target must lie in (0, 1/2)")
    x = _check_dim(b, x_start).copy()
    if not is_interior(b, x):
        raise DomainError("starting point is not interior")
    for _ in range(max_iter + 1):
        g = gradient(b, x)
        M = metric_at(b, x)
        step = M.solve(g)
        lam = math.sqrt(max(float(g @ step), 0.0))
        if lam <= kappa_target:
            return x
        x = x - step / (1.0 + lam)
    raise NonConvergenceError(
        f"Newton centering did not reach {kappa_target:g} in {max_iter} steps; "
        "the domain may be unbounded")
