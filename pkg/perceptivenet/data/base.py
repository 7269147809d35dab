"""
Segmentation sample type and batching helpers.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import torch

from ..exceptions import DatasetError
from ..utils.logging import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class SegSample:
    """
    One image with its class-ID mask.

    Attributes:
        image: (3, H, W) float32 array in [0, 1]
        mask: (H, W) uint8 array of class IDs
        stem: File stem identifying the sample
    """

    image: np.ndarray
    mask: np.ndarray
    stem: str = ""

    @property
    def shape(self):
        return self.mask.shape

    def validate(self, n_classes: Optional[int] = None) -> "SegSample":
        """
        Raises:
            DatasetError: If dims disagree, values leave [0, 1] or IDs reach n_classes
        """
        if self.image.ndim != 3 or self.image.shape[0] != 3:
            raise DatasetError(f"Sample {self.stem!r}: image must be (3, H, W), got {self.image.shape}")
        if self.mask.ndim != 2 or self.image.shape[1:] != self.mask.shape:
            logger.error(f"Sample {self.stem!r}: image {self.image.shape} vs mask {self.mask.shape}")
            raise DatasetError(
                f"Sample {self.stem!r}: image dims {self.image.shape[1:]} do not match mask dims {self.mask.shape}"
            )
        if self.image.size and (self.image.min() < 0.0 or self.image.max() > 1.0):
            raise DatasetError(f"Sample {self.stem!r}: image values must lie in [0, 1]")
        if n_classes is not None and self.mask.size and int(self.mask.max()) >= n_classes:
            logger.error(f"Sample {self.stem!r}: class ID {int(self.mask.max())} >= {n_classes}")
            raise DatasetError(
                f"Sample {self.stem!r}: unknown class ID {int(self.mask.max())} (n_classes={n_classes})"
            )
        return self


def stack_images(samples: Sequence[SegSample], dtype: torch.dtype = torch.float32) -> torch.Tensor:
    """(n, 3, H, W) tensor of the samples' images."""
    return torch.from_numpy(np.stack([s.image for s in samples])).to(dtype)


def stack_masks(samples: Sequence[SegSample]) -> torch.Tensor:
    """(n, H, W) int64 tensor of the samples' masks."""
    return torch.from_numpy(np.stack([s.mask for s in samples]).astype(np.int64))
