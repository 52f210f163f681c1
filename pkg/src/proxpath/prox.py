"""Nonsmooth convex terms with closed-form scaled proximity operators.

Supported kinds (all act on flat vectors; the diagonal-constraint kinds act on
packed symmetric matrices):

- ``zero``: g = 0
- ``l1``: g(x) = weight * ||x||_1
- ``affine_diag``: indicator of {X : diag(X) = e}
- ``elliptope_k``: indicator of {X : diag(X) = e, X_ij >= -1/(k-1)}
- ``box_indicator``: indicator of {x : l <= x <= u}

The PSD part of the Max-(k)-Cut feasible sets is left to the log-det barrier,
so every projection here is entrywise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import symmetric
from .errors import InvalidInputError

FEASIBILITY_TOL = 1e-9

INDICATOR_KINDS = ("affine_diag", "elliptope_k", "box_indicator")


@dataclass(frozen=True, eq=False)
class ProxFn:
    kind: str
    dimension: int
    weight: float = 1.0
    order: Optional[int] = None
    k: Optional[int] = None
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    @property
    def is_indicator(self) -> bool:
        return self.kind in INDICATOR_KINDS

    @property
    def offdiag_floor(self) -> float:
        """Lower bound on off-diagonal matrix entries (elliptope_k only)."""
        return -1.0 / (self.k - 1)


def zero(p: int) -> ProxFn:
    return ProxFn("zero", int(p))


def l1(p: int, weight: float = 1.0) -> ProxFn:
    if weight < 0:
        raise InvalidInputError("l1 weight must be nonnegative")
    return ProxFn("l1", int(p), weight=float(weight))


def affine_diag(n: int) -> ProxFn:
    return ProxFn("affine_diag", symmetric.packed_size(n), order=int(n))


def elliptope_k(n: int, k: int) -> ProxFn:
    if k < 2:
        raise InvalidInputError("Max-k-Cut needs k >= 2")
    return ProxFn("elliptope_k", symmetric.packed_size(n), order=int(n), k=int(k))


def box_indicator(lower, upper) -> ProxFn:
    lower = np.array(lower, dtype=float).ravel()
    upper = np.array(upper, dtype=float).ravel()
    if lower.shape != upper.shape or np.any(lower > upper):
        raise InvalidInputError("box indicator needs lower <= upper of equal length")
    lower.setflags(write=False)
    upper.setflags(write=False)
    return ProxFn("box_indicator", lower.size, lower=lower, upper=upper)


def _check(g: ProxFn, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.size != g.dimension:
        raise InvalidInputError(f"point has dimension {x.size}, g expects {g.dimension}")
    return x


def _elliptope_bounds(g: ProxFn):
    """Per-coordinate packed bounds: diagonal pinned at 1, off-diagonal floored."""
    diag = symmetric.diag_positions(g.order)
    lo = np.full(g.dimension, g.offdiag_floor * math.sqrt(2.0))
    lo[diag] = 1.0
    return diag, lo


def value(g: ProxFn, x) -> float:
    x = _check(g, x)
    if g.kind == "zero":
        return 0.0
    if g.kind == "l1":
        return g.weight * float(np.sum(np.abs(x)))
    if g.kind == "box_indicator":
        ok = np.all(x >= g.lower - FEASIBILITY_TOL) and np.all(x <= g.upper + FEASIBILITY_TOL)
        return 0.0 if ok else math.inf
    diag = symmetric.diag_positions(g.order)
    if np.max(np.abs(x[diag] - 1.0)) > FEASIBILITY_TOL:
        return math.inf
    if g.kind == "elliptope_k":
        _, lo = _elliptope_bounds(g)
        off = np.ones(g.dimension, dtype=bool)
        off[diag] = False
        # bound is on matrix entries, packed coordinates carry a sqrt(2) factor
        if np.any((x[off] - lo[off]) / math.sqrt(2.0) < -FEASIBILITY_TOL):
            return math.inf
    return 0.0


def prox_scaled(g: ProxFn, tau: float, u) -> np.ndarray:
    """``argmin_v tau*g(v) + 0.5*||v - u||^2``; projections ignore ``tau``."""
    if not tau > 0:
        raise InvalidInputError("prox scale tau must be positive")
    u = _check(g, u)
    if g.kind == "zero":
        return u.copy()
    if g.kind == "l1":
        thresh = tau * g.weight
        return np.sign(u) * np.maximum(np.abs(u) - thresh, 0.0)
    if g.kind == "box_indicator":
        return np.clip(u, g.lower, g.upper)
    if g.kind == "affine_diag":
        v = u.copy()
        v[symmetric.diag_positions(g.order)] = 1.0
        return v
    diag, lo = _elliptope_bounds(g)
    v = np.maximum(u, lo)
    v[diag] = 1.0
    return v


def diag_selector(g: ProxFn):
    """Packed positions and targets of the affine equality part, if any."""
    if g.kind in ("affine_diag", "elliptope_k"):
        pos = symmetric.diag_positions(g.order)
        return pos, np.ones(pos.size)
    return None


def subgradient(g: ProxFn, x, c=None, metric=None) -> np.ndarray:
    """A subgradient of g at a feasible x.

    For the diagonal-constraint indicators the normal-cone element is chosen as
    the diagonal matrix minimizing ``||c + xi||*`` in the given metric, which is
    a small least-squares problem in the metric's inverse. Without a metric or
    ``c`` the zero subgradient is returned.
    """
    x = _check(g, x)
    if g.kind == "l1":
        return g.weight * np.sign(x)
    sel = diag_selector(g)
    if sel is None or c is None or metric is None:
        return np.zeros(g.dimension)
    pos, _ = sel
    c = _check(g, c)
    E = np.zeros((g.dimension, pos.size))
    E[pos, np.arange(pos.size)] = 1.0
    WE = metric.solve(E)
    S = WE[pos, :]
    rhs = -metric.solve(c)[pos]
    y = np.linalg.solve(S, rhs)
    xi = np.zeros(g.dimension)
    xi[pos] = y
    return xi


def generalized_prox(g: ProxFn, u, M, tol: float = 1e-8) -> np.ndarray:
    """``argmin_v g(v) + 0.5*||v - u||_M^2`` solved to metric accuracy ``tol``.

    Delegates to the accelerated subsolver with a certified gap of ``tol^2/2``.
    """
    from .subsolver import QuadraticModel, solve

    u = _check(g, u)
    model = QuadraticModel(anchor=u, metric=M, h=np.zeros_like(u), g=g, t=1.0)
    return solve(model, tol).z
