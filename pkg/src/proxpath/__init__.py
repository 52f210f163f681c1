"""Single-phase proximal path-following for ``min <c, x> + g(x)`` over a
self-concordant barrier domain."""

from . import barrier, oracle, pathfollow, problems, prox, subsolver
from .errors import (ConditioningError, DomainError, GraphParseError, InitializationError,
                     InvalidInputError, NonConvergenceError, ProxPathError, SubsolverFailure)
from .pathfollow import SolveResult, SolverConfig, solve

__all__ = [
    "barrier", "oracle", "pathfollow", "problems", "prox", "subsolver",
    "ConditioningError", "DomainError", "GraphParseError", "InitializationError",
    "InvalidInputError", "NonConvergenceError", "ProxPathError", "SubsolverFailure",
    "SolveResult", "SolverConfig", "solve",
]
__version__ = "0.1.0"
