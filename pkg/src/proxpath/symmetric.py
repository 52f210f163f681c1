"""Packed storage for symmetric matrices.

A symmetric ``n x n`` matrix is stored as the ``n(n+1)/2`` entries of its
upper triangle, row by row, with off-diagonal entries multiplied by ``sqrt(2)``.
With this scaling the flat dot product of two packed vectors equals
``trace(A @ B)``, so Euclidean first-order methods act on packed vectors
exactly as they would on matrices under the Frobenius inner product.
"""

import math
from functools import lru_cache

import numpy as np

from .errors import InvalidInputError

SQRT2 = math.sqrt(2.0)
SYMMETRY_TOL = 1e-12


def packed_size(n: int) -> int:
    return n * (n + 1) // 2


def order_from_size(m: int) -> int:
    """Invert :func:`packed_size`, raising if ``m`` is not triangular."""
    n = int(round((math.sqrt(8 * m + 1) - 1) / 2))
    if packed_size(n) != m:
        raise InvalidInputError(f"{m} is not a packed symmetric size")
    return n


@lru_cache(maxsize=64)
def _layout(n: int):
    rows, cols = np.triu_indices(n)
    scale = np.where(rows == cols, 1.0, SQRT2)
    diag_pos = np.flatnonzero(rows == cols)
    for arr in (rows, cols, scale, diag_pos):
        arr.setflags(write=False)
    return rows, cols, scale, diag_pos


def triu_indices(n: int):
    """Row and column indices of each packed coordinate."""
    rows, cols, _, _ = _layout(n)
    return rows, cols


def diag_positions(n: int) -> np.ndarray:
    """Packed coordinates that hold the diagonal entries."""
    return _layout(n)[3]


def offdiag_scale(n: int) -> np.ndarray:
    """Per-coordinate factor: 1 on the diagonal, ``sqrt(2)`` elsewhere."""
    return _layout(n)[2]


def pack_sym(A, tol: float = SYMMETRY_TOL) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {A.shape}")
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if A.size and np.max(np.abs(A - A.T)) > tol * scale:
        raise InvalidInputError("matrix is not symmetric")
    rows, cols, s, _ = _layout(A.shape[0])
    return A[rows, cols] * s


def unpack_sym(v, n: int | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if n is None:
        n = order_from_size(v.size)
    elif v.size != packed_size(n):
        raise InvalidInputError(f"packed vector of size {v.size} does not match order {n}")
    rows, cols, s, _ = _layout(n)
    A = np.zeros((n, n))
    A[rows, cols] = v / s
    A[cols, rows] = v / s
    return A
