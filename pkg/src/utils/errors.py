"""
Error Hierarchy Module

All failures raised by the event-detection pipeline derive from
EventDetectionError. Validation problems (bad inputs, infeasible
configurations) are also ValueErrors; numerical failures during training are
also ArithmeticErrors. The CLI maps the two branches to distinct exit codes.

License: MIT
"""

from typing import Optional, Tuple


class EventDetectionError(Exception):
    """Base class for every error raised by this package."""


# =============================================================================
# VALIDATION ERRORS (exit code 2)
# =============================================================================

class ValidationError(EventDetectionError, ValueError):
    """Input data or configuration violates a documented precondition."""


class ConfigError(ValidationError):
    """A configuration value is out of range."""


class NonUniformSampling(ValidationError):
    """Series timestamps are not equally spaced."""

    def __init__(self, row: int, gap: float, spacing: float):
        self.row = row
        self.gap = gap
        self.spacing = spacing
        super().__init__(
            f"non-uniform sampling at row {row}: gap {gap!r} differs from spacing {spacing!r}"
        )


class MissingColumn(ValidationError):
    """A requested column is absent from a delimited file."""

    def __init__(self, column: str, path: Optional[str] = None):
        self.column = column
        where = f" in {path}" if path else ""
        super().__init__(f"missing column '{column}'{where}")


class NonFiniteValue(ValidationError):
    """A NaN or infinite value was found where finite reals are required."""


class MalformedFile(ValidationError):
    """A delimited input file cannot be parsed (ragged rows, binary content)."""


class InvalidLabel(ValidationError):
    """A binary label column holds something other than 0 or 1."""


class OverlappingEvents(ValidationError):
    """Two events intersect although the event set must be disjoint."""

    def __init__(self, first: Tuple[float, float], second: Tuple[float, float]):
        self.first = first
        self.second = second
        super().__init__(f"overlapping events {first} and {second}")


class InvertedInterval(ValidationError):
    """An event ends before it starts."""

    def __init__(self, start: float, end: float):
        self.start = start
        self.end = end
        super().__init__(f"inverted interval: end {end!r} < start {start!r}")


class DurationMismatch(ValidationError):
    """An event does not have the adjusted duration w_s."""


class WindowTooLarge(ValidationError):
    """Window size w exceeds the series length N (or is below 2)."""

    def __init__(self, w: int, n_steps: int):
        self.w = w
        self.n_steps = n_steps
        super().__init__(f"window size w={w} is invalid for a series of N={n_steps} steps")


class DimensionMismatch(ValidationError):
    """Array shapes disagree (model input width, target length, ...)."""


class InfeasiblePlacement(ValidationError):
    """Synthetic events cannot be placed under the minimum-gap constraint."""


class ModelFormatError(ValidationError):
    """A serialized model file is malformed."""


# =============================================================================
# NUMERICAL ERRORS (exit code 3)
# =============================================================================

class NumericalError(EventDetectionError, ArithmeticError):
    """A numerical procedure failed at run time."""


class NonFiniteLoss(NumericalError):
    """Training diverged: the loss became NaN or infinite."""

    def __init__(self, epoch: int, loss: float):
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"training diverged at epoch {epoch}: loss={loss!r}")
