"""Plain-text graph files.

Grammar (whitespace separated, ``#`` or ``%`` starts a comment line)::

    n m
    i j [w]      # m lines, 1-based node indices, weight defaults to 1
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .errors import GraphParseError

COMMENT_PREFIXES = ("#", "%")


@dataclass(frozen=True)
class GraphFile:
    n: int
    m: int
    edges: List[Tuple[int, int, float]]


def _int(tok: str, what: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise GraphParseError(f"{what} must be an integer, got {tok!r}", lineno) from None


def parse_graph(text: str) -> GraphFile:
    header = None
    edges = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(COMMENT_PREFIXES):
            continue
        toks = line.split()
        if header is None:
            if len(toks) != 2:
                raise GraphParseError("header must be 'n m'", lineno)
            n = _int(toks[0], "node count", lineno)
            m = _int(toks[1], "edge count", lineno)
            if n < 1 or m < 0:
                raise GraphParseError("node count must be positive and edge count nonnegative", lineno)
            header = (n, m)
            continue
        if len(toks) not in (2, 3):
            raise GraphParseError("edge line must be 'i j [w]'", lineno)
        i = _int(toks[0], "node index", lineno)
        j = _int(toks[1], "node index", lineno)
        w = 1.0
        if len(toks) == 3:
            try:
                w = float(toks[2])
            except ValueError:
                raise GraphParseError(f"weight must be a real number, got {toks[2]!r}", lineno) from None
            if not np.isfinite(w):
                raise GraphParseError("weight must be finite", lineno)
        n = header[0]
        if not (1 <= i <= n and 1 <= j <= n):
            raise GraphParseError(f"node index out of range 1..{n}", lineno)
        if i == j:
            raise GraphParseError("self-loops are not allowed", lineno)
        key = (min(i, j), max(i, j))
        if key in seen:
            raise GraphParseError(f"duplicate edge {key[0]}-{key[1]}", lineno)
        seen.add(key)
        edges.append((i, j, w))
    if header is None:
        raise GraphParseError("missing 'n m' header")
    if len(edges) != header[1]:
        raise GraphParseError(f"header declares {header[1]} edges but {len(edges)} were given")
    return GraphFile(header[0], header[1], edges)


def laplacian(gf: GraphFile) -> np.ndarray:
    """``L = D - W`` with the degrees taken as row sums, so rows sum to zero exactly."""
    W = np.zeros((gf.n, gf.n))
    for i, j, w in gf.edges:
        W[i - 1, j - 1] = w
        W[j - 1, i - 1] = w
    L = -W
    L[np.diag_indices(gf.n)] = W.sum(axis=1)
    return L
