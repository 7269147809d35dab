"""
Class activation maps for the segmentation head.

The map of class c is the final decoder features weighted by row c of the 1x1
projection, rectified and min-max normalised. A constant map normalises to zeros.
"""

from pathlib import Path
from typing import Union

import numpy as np
import torch
import torch.nn.functional as F
from matplotlib import colormaps
from PIL import Image

from ..exceptions import MetricsError
from ..utils.logging import get_logger

logger = get_logger(__name__)

OVERLAY_WEIGHT = 0.5


@torch.no_grad()
def compute_cam(model, image: torch.Tensor, class_id: int) -> np.ndarray:
    """
    Heatmap of class ``class_id`` for one image.

    Args:
        model: SegModel
        image: (3, H, W) or (1, 3, H, W) tensor
        class_id: Class index

    Returns:
        (H, W) float64 array in [0, 1]

    Raises:
        MetricsError: If class_id is out of range
    """
    n_classes = model.config.n_classes
    if not 0 <= class_id < n_classes:
        logger.error(f"CAM class {class_id} out of range")
        raise MetricsError(f"Class {class_id} out of range [0, {n_classes})")
    if image.dim() == 3:
        image = image.unsqueeze(0)
    was_training = model.training
    model.eval()
    try:
        param = next(model.parameters())
        features = model.features(image.to(dtype=param.dtype, device=param.device))
    finally:
        model.train(was_training)

    weights = model.head.weight[class_id, :, 0, 0]
    cam = torch.relu(torch.einsum("c,chw->hw", weights, features[0]))
    if cam.shape != image.shape[-2:]:
        cam = F.interpolate(cam[None, None], size=image.shape[-2:], mode="bilinear", align_corners=False)[0, 0]
    heatmap = cam.double().cpu().numpy()
    low, high = heatmap.min(), heatmap.max()
    if high <= low:
        return np.zeros_like(heatmap)
    return (heatmap - low) / (high - low)


def colourise(heatmap: np.ndarray, cmap: str = "jet") -> np.ndarray:
    """(H, W) heatmap in [0, 1] to (H, W, 3) RGB in [0, 1]."""
    return colormaps[cmap](np.clip(heatmap, 0.0, 1.0))[..., :3]


def overlay(image: np.ndarray, heatmap: np.ndarray) -> np.ndarray:
    """
    Blend a heatmap onto an image.

    Args:
        image: (3, H, W) array in [0, 1]
        heatmap: (H, W) array in [0, 1]

    Returns:
        (H, W, 3) array: 0.5 image + 0.5 colourised heatmap where the heatmap
        is positive, the image itself elsewhere
    """
    if image.shape[1:] != heatmap.shape:
        raise MetricsError(f"Image dims {image.shape[1:]} do not match heatmap dims {heatmap.shape}")
    base = np.transpose(image, (1, 2, 0)).astype(np.float64)
    blended = OVERLAY_WEIGHT * base + (1.0 - OVERLAY_WEIGHT) * colourise(heatmap)
    return np.where((heatmap > 0)[..., None], blended, base)


def to_uint8(array: np.ndarray) -> np.ndarray:
    return np.round(np.clip(array, 0.0, 1.0) * 255.0).astype(np.uint8)


def save_cam(heatmap: np.ndarray, image: np.ndarray, out_dir: Union[str, Path], stem: str) -> Path:
    """Write ``<stem>_cam.png`` (grayscale) and ``<stem>_overlay.png`` (RGB)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    Image.fromarray(to_uint8(heatmap)).save(out_dir / f"{stem}_cam.png")
    overlay_path = out_dir / f"{stem}_overlay.png"
    Image.fromarray(to_uint8(overlay(image, heatmap))).save(overlay_path)
    logger.info(f"Saved CAM for {stem} to {out_dir}")
    return overlay_path
