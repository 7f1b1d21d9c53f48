"""Exception types shared across the package."""


class TruncLapError(Exception):
    """Base class for all package errors."""


class ParameterError(TruncLapError, ValueError):
    """An argument is outside the range an operation accepts."""


class DomainError(TruncLapError, ValueError):
    """A point or node lies outside the set where an evaluator is defined."""


class InvariantError(TruncLapError, ValueError):
    """A constructed object violates one of its structural invariants."""


class IterationLimitError(TruncLapError, RuntimeError):
    """An iterative method hit its iteration cap before converging.

    The residual history is kept on the exception so callers can report it.
    """

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


class DivergenceError(TruncLapError, RuntimeError):
    """An iteration produced non-finite or runaway values."""

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)
