"""Exception types shared across the package."""


class InvalidInput(ValueError):
    """Arguments violate a documented precondition."""


class NonConvergence(RuntimeError):
    """An iteration exceeded its safeguard limit."""


class RankTolNotResolved(RuntimeError):
    """Rank estimation hit its sketch-size cap before the tolerance resolved.

    Carries the partial estimate so callers can proceed with it.
    """

    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate


class ZeroMatrixSketch(RuntimeError):
    """The norm-estimation sketch of the matrix is identically zero."""


class IntegratorAccuracy(RuntimeError):
    """Step-halving check of the fixed-step integrator exceeded tolerance."""


class ParseError(ValueError):
    """A file could not be parsed. Carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
