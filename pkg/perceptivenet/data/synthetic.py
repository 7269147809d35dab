"""
Synthetic aerial-style segmentation data.

Each image holds textured elliptical "crowns" on a textured background. A class
is identified by its colour and by the frequency and direction of its texture.
Optional multiplicative shadow bands darken the image without touching the mask.
"""

from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional

import numpy as np
from matplotlib.colors import hsv_to_rgb

from ..exceptions import PerceptiveNetValidationError
from ..utils.logging import get_logger
from ..utils.validation import validate_min_int, validate_positive, validate_unit_interval
from .base import SegSample

logger = get_logger(__name__)

BACKGROUND_COLOUR = (0.30, 0.28, 0.24)
TEXTURE_AMPLITUDE = 0.12
SHADOW_FACTOR = 0.6
MAX_PLACEMENT_ATTEMPTS = 25


@dataclass(frozen=True)
class SynthSpec:
    """
    Synthetic dataset parameters.

    Attributes:
        n_samples: Number of images
        image_size: Side of the square images
        n_classes: Classes including background (class 0)
        blob_count_min, blob_count_max: Crowns per image, inclusive
        blob_radius_min, blob_radius_max: Ellipse semi-axes in pixels
        noise: Standard deviation of additive Gaussian pixel noise
        shadow_probability: Chance that an image receives one shadow band
        overlap: Whether crowns may overlap earlier crowns
    """

    n_samples: int = 200
    image_size: int = 64
    n_classes: int = 3
    blob_count_min: int = 2
    blob_count_max: int = 6
    blob_radius_min: float = 5.0
    blob_radius_max: float = 14.0
    noise: float = 0.03
    shadow_probability: float = 0.3
    overlap: bool = True

    def validate(self, divisor: Optional[int] = None) -> "SynthSpec":
        """
        Args:
            divisor: Required factor of image_size, usually 2**depth of the target model

        Raises:
            PerceptiveNetValidationError: On any invalid field
        """
        validate_min_int(self.n_samples, 1, "n_samples")
        validate_min_int(self.image_size, 8, "image_size")
        validate_min_int(self.n_classes, 2, "n_classes")
        validate_min_int(self.blob_count_min, 0, "blob_count_min")
        validate_min_int(self.blob_count_max, self.blob_count_min, "blob_count_max")
        validate_positive(self.blob_radius_min, "blob_radius_min")
        validate_positive(self.blob_radius_max, "blob_radius_max")
        if self.blob_radius_max < self.blob_radius_min:
            raise PerceptiveNetValidationError(
                f"blob_radius_max {self.blob_radius_max} is below blob_radius_min {self.blob_radius_min}"
            )
        if self.noise < 0:
            raise PerceptiveNetValidationError(f"noise must be >= 0, got {self.noise}")
        validate_unit_interval(self.shadow_probability, "shadow_probability")
        if divisor is not None and self.image_size % divisor:
            logger.error(f"image_size {self.image_size} not divisible by {divisor}")
            raise PerceptiveNetValidationError(f"image_size {self.image_size} must be divisible by {divisor}")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def class_colours(n_classes: int) -> np.ndarray:
    """(n_classes, 3) RGB signature colours; class 0 is the background."""
    colours = np.empty((n_classes, 3), dtype=np.float64)
    colours[0] = BACKGROUND_COLOUR
    n_fg = n_classes - 1
    hues = np.arange(n_fg) / n_fg
    hsv = np.stack([hues, np.full(n_fg, 0.7), np.full(n_fg, 0.85)], axis=1)
    colours[1:] = hsv_to_rgb(hsv)
    return colours


def class_texture(class_id: int, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Unit-mean multiplicative sinusoid whose frequency and direction depend on the class."""
    frequency = 0.06 + 0.05 * class_id
    angle = class_id * np.pi / 5.0
    phase = 2.0 * np.pi * frequency * (x * np.cos(angle) + y * np.sin(angle))
    return 1.0 + TEXTURE_AMPLITUDE * np.sin(phase)


def _ellipse(x, y, cx, cy, a, b, angle) -> np.ndarray:
    dx = x - cx
    dy = y - cy
    xr = dx * np.cos(angle) + dy * np.sin(angle)
    yr = -dx * np.sin(angle) + dy * np.cos(angle)
    return (xr / a) ** 2 + (yr / b) ** 2 <= 1.0


def _shadow_band(rng: np.random.Generator, x: np.ndarray, y: np.ndarray, size: int) -> np.ndarray:
    angle = rng.uniform(0.0, np.pi)
    offset = rng.uniform(-0.5 * size, 0.5 * size)
    width = rng.uniform(0.1 * size, 0.3 * size)
    distance = (x - size / 2) * np.cos(angle) + (y - size / 2) * np.sin(angle) - offset
    return np.abs(distance) <= width / 2


def generate_sample(spec: SynthSpec, seed: int, index: int) -> SegSample:
    """Sample ``index`` of the dataset; depends only on (spec, seed, index)."""
    rng = np.random.default_rng(seed ^ index)
    size = spec.image_size
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    colours = class_colours(spec.n_classes)

    mask = np.zeros((size, size), dtype=np.uint8)
    n_blobs = int(rng.integers(spec.blob_count_min, spec.blob_count_max + 1))
    for _ in range(n_blobs):
        class_id = int(rng.integers(1, spec.n_classes))
        for _attempt in range(MAX_PLACEMENT_ATTEMPTS):
            cx, cy = rng.uniform(0, size, size=2)
            a, b = rng.uniform(spec.blob_radius_min, spec.blob_radius_max, size=2)
            region = _ellipse(x, y, cx, cy, a, b, rng.uniform(0.0, np.pi))
            if spec.overlap or not np.any(mask[region]):
                mask[region] = class_id
                break

    image = np.empty((3, size, size), dtype=np.float64)
    for class_id in range(spec.n_classes):
        region = mask == class_id
        if not region.any():
            continue
        texture = class_texture(class_id, x[region], y[region])
        image[:, region] = colours[class_id][:, None] * texture[None, :]

    if spec.noise > 0:
        image += rng.normal(0.0, spec.noise, size=image.shape)
    if rng.random() < spec.shadow_probability:
        image[:, _shadow_band(rng, x, y, size)] *= SHADOW_FACTOR

    # quantised to 8-bit levels so a saved and reloaded dataset is identical
    image = np.round(np.clip(image, 0.0, 1.0) * 255.0) / 255.0
    return SegSample(image.astype(np.float32), mask, stem=f"synth_{index:05d}")


def generate_synthetic(spec: SynthSpec, seed: int = 0) -> List[SegSample]:
    """
    Generate a synthetic dataset.

    Args:
        spec: Dataset parameters
        seed: Dataset seed; sample i uses the stream seeded with seed ^ i

    Returns:
        List of spec.n_samples SegSample
    """
    spec.validate()
    samples = [generate_sample(spec, seed, i).validate(spec.n_classes) for i in range(spec.n_samples)]
    logger.info(f"Generated {len(samples)} synthetic samples ({spec.image_size}px, {spec.n_classes} classes, seed {seed})")
    return samples
