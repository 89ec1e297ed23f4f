"""Exception hierarchy shared by the solver modules."""


class SolverError(Exception):
    """Base class for every error raised by the package."""


class RankDeficient(SolverError):
    """A pivot of a triangular factor fell below the configured floor."""


class NonFinite(SolverError):
    """An input contained NaN or Inf."""


class NoConvergence(SolverError):
    """An iterative weight computation hit its iteration cap."""


class Overflow(SolverError):
    """A potential evaluation left the representable range."""


class ZeroVector(SolverError):
    """Projection was asked to align with the zero vector."""


class NonInterior(SolverError):
    """Some slack is not strictly positive."""


class StepTooLarge(SolverError):
    """Centrality times slack sensitivity exceeds the stability threshold."""


class RollbackLoop(SolverError):
    """Repeated rollbacks at the same path parameter."""


class IterationLimit(SolverError):
    """The iteration budget ran out."""


class InitializationFailure(SolverError):
    """Could not switch from the auxiliary cost to the true cost."""


class AmbiguousActiveSet(SolverError):
    """The rows flagged as active do not determine a unique point."""


class ParseError(SolverError):
    """Malformed instance file."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DimensionMismatch(SolverError):
    """Instance arrays have inconsistent shapes."""
