"""Builders for composite problems ``min <c, x> + g(x)`` over a barrier domain.

All problems are minimizations: the Max-Cut style maximizations are negated, so
optimal objectives are negative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import barrier as _barrier
from . import prox as _prox
from .errors import InvalidInputError
from .symmetric import pack_sym, unpack_sym  # noqa: F401  (re-exported)

LAPLACIAN_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CompositeProblem:
    c: np.ndarray
    g: _prox.ProxFn
    barrier: _barrier.Barrier
    p_ambient: int
    matrix_shape: Optional[Tuple[int, int]] = None
    known_optimum: Optional[float] = None
    name: str = ""

    def __post_init__(self):
        if not (self.c.size == self.g.dimension == self.barrier.dimension == self.p_ambient):
            raise InvalidInputError("c, g and barrier dimensions disagree")

    def objective(self, x) -> float:
        return float(self.c @ x) + _prox.value(self.g, x)


def _check_laplacian(L, allow_negative_weights: bool) -> np.ndarray:
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1] or L.shape[0] < 1:
        raise InvalidInputError(f"Laplacian must be a non-empty square matrix, got {L.shape}")
    scale = max(1.0, float(np.max(np.abs(L))))
    if np.max(np.abs(L - L.T)) > 1e-12 * scale:
        raise InvalidInputError("Laplacian is not symmetric")
    if np.max(np.abs(L.sum(axis=1))) > LAPLACIAN_TOL * scale:
        raise InvalidInputError("Laplacian rows must sum to zero")
    off = L - np.diag(np.diag(L))
    if not allow_negative_weights and np.max(off) > LAPLACIAN_TOL * scale:
        raise InvalidInputError(
            "positive off-diagonal entries imply negative edge weights; "
            "pass allow_negative_weights=True for signed graphs")
    return L


def maxcut(L, allow_negative_weights: bool = False) -> CompositeProblem:
    """SDP relaxation ``min <-L/4, X>`` s.t. ``diag(X) = e``, ``X`` PSD."""
    L = _check_laplacian(L, allow_negative_weights)
    n = L.shape[0]
    c = pack_sym(-0.25 * L)
    return CompositeProblem(c, _prox.affine_diag(n), _barrier.logdet(n), c.size,
                            matrix_shape=(n, n), name="maxcut")


def maxkcut(L, k: int, allow_negative_weights: bool = False) -> CompositeProblem:
    """Max-k-Cut relaxation with the extra floor ``X_ij >= -1/(k-1)``."""
    if k < 2:
        raise InvalidInputError("Max-k-Cut needs k >= 2")
    L = _check_laplacian(L, allow_negative_weights)
    n = L.shape[0]
    c = pack_sym(-((k - 1) / (2.0 * k)) * L)
    return CompositeProblem(c, _prox.elliptope_k(n, k), _barrier.logdet(n), c.size,
                            matrix_shape=(n, n), name=f"max{k}cut")


def box_lp(c, lower, upper) -> CompositeProblem:
    c = np.array(c, dtype=float).ravel()
    b = _barrier.box(lower, upper)
    if c.size != b.dimension:
        raise InvalidInputError("cost vector and box bounds have different lengths")
    optimum = float(np.sum(np.minimum(c * b.lower, c * b.upper)))
    return CompositeProblem(c, _prox.zero(c.size), b, c.size, known_optimum=optimum,
                            name="boxlp")
