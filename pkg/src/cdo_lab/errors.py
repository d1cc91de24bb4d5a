"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class CdoLabError(Exception):
    """Base class for all library errors."""


class GroupError(CdoLabError, ValueError):
    """Invalid element, unknown group id, or mixed-group operands."""


class HorizonError(CdoLabError):
    """Word length requested beyond the precomputed search horizon."""


class BudgetError(CdoLabError):
    """A support or ball size cap was exceeded."""


class ConvergenceError(CdoLabError):
    """Iteration cap hit before the requested tolerance was reached."""

    def __init__(self, message: str, last_value: float, iterations: int):
        super().__init__(message)
        self.last_value = last_value
        self.iterations = iterations


class IllConditionedError(CdoLabError):
    """Finite section is singular or its condition estimate is above the limit."""

    def __init__(self, message: str, condition: float):
        super().__init__(message)
        self.condition = condition


class NotSelfAdjointError(CdoLabError, ValueError):
    """An operation requiring f = f* received a non-selfadjoint element."""
