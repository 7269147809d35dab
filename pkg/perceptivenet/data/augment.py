"""
Right-angle rotation and flip augmentation, applied identically to image and mask.
"""

from dataclasses import dataclass

import numpy as np

from ..constants import HFLIP_PROBABILITY, ROTATE_PROBABILITY, VFLIP_PROBABILITY
from ..exceptions import PerceptiveNetValidationError
from .base import SegSample


@dataclass(frozen=True)
class Transform:
    """Quarter turns (0-3, counter-clockwise) followed by optional horizontal then vertical flips."""

    rotate_k: int = 0
    hflip: bool = False
    vflip: bool = False

    @property
    def is_identity(self) -> bool:
        return self.rotate_k == 0 and not self.hflip and not self.vflip


def draw_transform(rng: np.random.Generator) -> Transform:
    """
    Draw one transform. Always consumes four draws, in order: rotation event,
    quarter-turn count in {1, 2, 3}, horizontal flip event, vertical flip event.
    """
    rotate = rng.random() < ROTATE_PROBABILITY
    k = int(rng.integers(1, 4))
    hflip = rng.random() < HFLIP_PROBABILITY
    vflip = rng.random() < VFLIP_PROBABILITY
    return Transform(k if rotate else 0, bool(hflip), bool(vflip))


def apply_transform(array: np.ndarray, transform: Transform) -> np.ndarray:
    """
    Apply a transform to the last two axes of ``array``.

    Raises:
        PerceptiveNetValidationError: If a rotation is requested on a non-square array
    """
    if transform.rotate_k and array.shape[-1] != array.shape[-2]:
        raise PerceptiveNetValidationError(f"Rotation needs square inputs, got {array.shape[-2:]}")
    out = np.rot90(array, transform.rotate_k, axes=(-2, -1)) if transform.rotate_k else array
    if transform.hflip:
        out = np.flip(out, axis=-1)
    if transform.vflip:
        out = np.flip(out, axis=-2)
    return np.ascontiguousarray(out)


def augment(sample: SegSample, rng: np.random.Generator) -> SegSample:
    """Draw a transform from ``rng`` and apply it to the sample's image and mask."""
    transform = draw_transform(rng)
    if transform.is_identity:
        return sample
    return SegSample(apply_transform(sample.image, transform), apply_transform(sample.mask, transform), sample.stem)
