"""
Custom exceptions for the PerceptiveNet package.
"""

from typing import Iterable, Optional, Sequence


class PerceptiveNetError(Exception):
    """Base exception for PerceptiveNet errors."""
    pass


class PerceptiveNetValidationError(PerceptiveNetError):
    """
    Input validation error.

    Raised when arguments, configs or data fail validation.
    """
    pass


class ShapeMismatchError(PerceptiveNetValidationError):
    """
    Tensor shape error.

    Raised when two shapes that must agree do not. Both shapes are kept
    on the exception and named in the message.
    """

    def __init__(self, message: str, expected: Sequence[int], actual: Sequence[int]):
        self.expected = tuple(expected)
        self.actual = tuple(actual)
        super().__init__(f"{message}: expected {self.expected}, got {self.actual}")


class ConfigError(PerceptiveNetValidationError):
    """
    Configuration error.

    Raised when a config is invalid. ``fields`` lists the offending keys.
    """

    def __init__(self, message: str, fields: Optional[Iterable[str]] = None):
        self.fields = list(fields or [])
        if self.fields:
            message = f"{message} (fields: {', '.join(self.fields)})"
        super().__init__(message)


class DatasetError(PerceptiveNetValidationError):
    """
    Dataset error.

    Raised for missing pairs, mismatched dimensions or unknown class IDs.
    """
    pass


class MetricsError(PerceptiveNetValidationError):
    """
    Metrics error.

    Raised for empty confusion matrices or out-of-range classes.
    """
    pass


class GradientError(PerceptiveNetError):
    """
    Differentiation contract error.

    Raised on backward over a non-scalar, a repeated backward over the same
    recording, or non-finite values.
    """
    pass


class CheckpointError(PerceptiveNetError):
    """
    Checkpoint error.

    Raised when a checkpoint file is corrupt, truncated or of unknown version.
    """
    pass


class DivergenceError(PerceptiveNetError):
    """
    Training divergence error.

    Raised when the training loss stops being finite.
    """

    def __init__(self, epoch: int, batch: int, loss: float):
        self.epoch = epoch
        self.batch = batch
        self.loss = loss
        super().__init__(f"Non-finite loss {loss} at epoch {epoch}, batch {batch}")
