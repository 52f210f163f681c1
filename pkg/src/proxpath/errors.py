"""Exception hierarchy shared by all solver modules."""


class ProxPathError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(ProxPathError, ValueError):
    """Malformed arguments: wrong dimensions, bad parameters, bad files."""


class DomainError(ProxPathError, ValueError):
    """A point lies on or outside the boundary of the barrier's domain."""


class ConditioningError(ProxPathError, ArithmeticError):
    """A metric is numerically singular or a spectrum estimate stagnated."""


class NonConvergenceError(ProxPathError, RuntimeError):
    """An iterative routine hit its iteration cap."""


class InitializationError(ProxPathError):
    """The initialization scalars violate a required inequality."""


class SubsolverFailure(NonConvergenceError):
    """The inner solver could not certify the requested accuracy.

    The best iterate seen so far and its certificate are kept so that callers
    can return a partial result.
    """

    def __init__(self, message, z=None, gap_bound=float("inf"), iters=0):
        super().__init__(message)
        self.z = z
        self.gap_bound = gap_bound
        self.iters = iters


class GraphParseError(InvalidInputError):
    """A graph file does not follow the ``n m`` / ``i j [w]`` grammar."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno
