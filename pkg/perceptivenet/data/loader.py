"""
On-disk dataset layout.

    <root>/images/<stem>.png   8-bit RGB
    <root>/masks/<stem>.png    8-bit single channel, pixel value = class ID
    <root>/meta.txt            key=value echo of the generator settings (synthetic sets)
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
from PIL import Image

from ..exceptions import DatasetError
from ..utils.logging import get_logger
from .base import SegSample

logger = get_logger(__name__)

PathLike = Union[str, Path]

IMAGES_DIR = "images"
MASKS_DIR = "masks"
META_FILE = "meta.txt"


def image_to_png(image: np.ndarray) -> Image.Image:
    """(3, H, W) array in [0, 1] as an RGB image."""
    pixels = np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)
    return Image.fromarray(np.ascontiguousarray(pixels.transpose(1, 2, 0)))


def mask_to_png(mask: np.ndarray) -> Image.Image:
    return Image.fromarray(np.ascontiguousarray(mask.astype(np.uint8)))


def read_image(path: PathLike) -> np.ndarray:
    """Decode an image file to a (3, H, W) float32 array in [0, 1]."""
    with Image.open(path) as img:
        pixels = np.asarray(img.convert("RGB"), dtype=np.float64)
    # same k / 255 rounding as the synthetic generator
    return np.ascontiguousarray((pixels.transpose(2, 0, 1) / 255.0).astype(np.float32))


def read_mask(path: PathLike) -> np.ndarray:
    """Decode a class-ID mask. Only single-channel 8-bit images are accepted."""
    with Image.open(path) as img:
        if img.mode not in ("L", "P"):
            raise DatasetError(f"Mask {Path(path).stem!r} has mode {img.mode}, expected 8-bit single channel")
        return np.array(img, dtype=np.uint8)


def write_meta(path: Path, meta: Dict[str, Any]) -> None:
    lines = [f"{key}={value}" for key, value in meta.items()]
    path.write_text("\n".join(lines) + "\n")


def save_dataset(samples: Sequence[SegSample], root: PathLike, meta: Optional[Dict[str, Any]] = None) -> Path:
    """
    Write samples in the dataset layout.

    Args:
        samples: Samples with unique stems
        root: Dataset directory, created if needed
        meta: Optional key/value pairs written to meta.txt

    Returns:
        The dataset root
    """
    root = Path(root)
    (root / IMAGES_DIR).mkdir(parents=True, exist_ok=True)
    (root / MASKS_DIR).mkdir(parents=True, exist_ok=True)
    for sample in samples:
        image_to_png(sample.image).save(root / IMAGES_DIR / f"{sample.stem}.png")
        mask_to_png(sample.mask).save(root / MASKS_DIR / f"{sample.stem}.png")
    if meta is not None:
        write_meta(root / META_FILE, meta)
    logger.info(f"Saved {len(samples)} samples to {root}")
    return root


def load_dataset(root: PathLike, n_classes: Optional[int] = None) -> List[SegSample]:
    """
    Load image/mask pairs by file stem.

    Args:
        root: Dataset directory
        n_classes: If given, mask IDs must be below it

    Returns:
        Samples sorted by stem

    Raises:
        DatasetError: Missing directories, a missing mask (naming the stem),
            mismatched dims or an unknown class ID
    """
    root = Path(root)
    images_dir = root / IMAGES_DIR
    masks_dir = root / MASKS_DIR
    if not images_dir.is_dir() or not masks_dir.is_dir():
        logger.error(f"Dataset layout missing under {root}")
        raise DatasetError(f"Dataset {root} must contain '{IMAGES_DIR}/' and '{MASKS_DIR}/' directories")

    samples = []
    for image_path in sorted(images_dir.glob("*.png")):
        stem = image_path.stem
        mask_path = masks_dir / f"{stem}.png"
        if not mask_path.is_file():
            logger.error(f"No mask for image {stem}")
            raise DatasetError(f"Missing mask for image {stem!r}")
        sample = SegSample(read_image(image_path), read_mask(mask_path), stem)
        samples.append(sample.validate(n_classes))

    orphans = {p.stem for p in masks_dir.glob("*.png")} - {s.stem for s in samples}
    if orphans:
        logger.warning(f"Ignoring {len(orphans)} masks without images in {root}")
    logger.info(f"Loaded {len(samples)} samples from {root}")
    return samples
