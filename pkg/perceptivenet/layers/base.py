"""
Base layer classes for the PerceptiveNet package.
"""

import torch
import torch.nn as nn

from ..exceptions import ShapeMismatchError
from ..utils.logging import get_logger


class BaseLayer(nn.Module):
    """
    Base class for PerceptiveNet layers.

    Attributes:
        logger (logging.Logger): Logger named after the concrete class
    """

    def __init__(self):
        super().__init__()
        self.logger = get_logger(f"perceptivenet.layers.{self.__class__.__name__.lower()}")

    def project_(self) -> None:
        """Move parameters back into their valid domain after an update. No-op by default."""
        return None

    def _require_rank4(self, x: torch.Tensor) -> None:
        if x.dim() != 4:
            raise ShapeMismatchError(f"{self.__class__.__name__} expects NCHW input", ("n", "c", "h", "w"), tuple(x.shape))

    def _require_channels(self, x: torch.Tensor, channels: int) -> None:
        self._require_rank4(x)
        if x.shape[1] != channels:
            self.logger.error(f"Expected {channels} input channels, got shape {tuple(x.shape)}")
            raise ShapeMismatchError(
                f"{self.__class__.__name__} input channels",
                (None, channels, None, None),
                tuple(x.shape),
            )

    def _require_even(self, x: torch.Tensor) -> None:
        self._require_rank4(x)
        h, w = x.shape[-2:]
        if h % 2 or w % 2:
            self.logger.error(f"Odd spatial dims {tuple(x.shape)}")
            raise ShapeMismatchError(
                f"{self.__class__.__name__} needs even spatial dims",
                (None, None, h + h % 2, w + w % 2),
                tuple(x.shape),
            )


class PreActivation(nn.Sequential):
    """Batch normalisation followed by ReLU, placed in front of a convolution."""

    def __init__(self, channels: int):
        super().__init__(nn.BatchNorm2d(channels), nn.ReLU())


def same_padding(kernel_size: int, dilation: int = 1) -> int:
    """Padding that keeps spatial dims for an odd kernel at stride 1."""
    return dilation * (kernel_size - 1) // 2
