"""
Evaluation of a model over a list of samples.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
import torch
import torch.nn.functional as F

from ..data.base import SegSample, stack_images, stack_masks
from ..exceptions import DatasetError
from ..metrics.confusion import ConfusionMatrix
from ..utils.logging import get_logger

logger = get_logger(__name__)

ModelLike = Union[torch.nn.Module, Callable[[torch.Tensor], torch.Tensor]]


@dataclass
class EvalResult:
    """Metrics of one evaluation pass."""

    pixel_acc: float
    miou: float
    per_class_iou: List[float]
    loss: float
    n_samples: int
    confusion: Optional[ConfusionMatrix] = field(default=None, repr=False, compare=False)


def _model_dtype(model: ModelLike) -> torch.dtype:
    if isinstance(model, torch.nn.Module):
        for parameter in model.parameters():
            return parameter.dtype
    return torch.float64


def predict(model: ModelLike, images: torch.Tensor) -> torch.Tensor:
    """Logits of a batch under ``no_grad``; modules are switched to eval mode and restored."""
    module = model if isinstance(model, torch.nn.Module) else None
    was_training = module.training if module is not None else False
    if module is not None:
        module.eval()
    try:
        with torch.no_grad():
            return model(images)
    finally:
        if module is not None:
            module.train(was_training)


def evaluate(
    model: ModelLike,
    samples: Sequence[SegSample],
    batch_size: int = 16,
    n_classes: Optional[int] = None,
) -> EvalResult:
    """
    Argmax predictions, confusion accumulation and metrics.

    Args:
        model: SegModel or any callable mapping (n, 3, H, W) images to logits
        samples: Non-empty evaluation set
        batch_size: Samples per forward pass
        n_classes: Class count; defaults to the logits' channel count

    Returns:
        EvalResult with pixel accuracy, mean IoU, per-class IoU (NaN for absent
        classes) and the mean pixel cross-entropy

    Raises:
        DatasetError: If ``samples`` is empty
    """
    if not samples:
        logger.error("evaluate called with an empty dataset")
        raise DatasetError("Cannot evaluate on an empty dataset")
    dtype = _model_dtype(model)
    cm = None
    loss_sum = 0.0
    n_pixels = 0
    for start in range(0, len(samples), batch_size):
        batch = samples[start:start + batch_size]
        images = stack_images(batch, dtype)
        masks = stack_masks(batch)
        logits = predict(model, images)
        if cm is None:
            cm = ConfusionMatrix(n_classes or logits.shape[1])
        cm.update(logits.argmax(dim=1), masks)
        loss_sum += float(F.cross_entropy(logits.double(), masks, reduction="sum"))
        n_pixels += masks.numel()

    per_class = cm.per_class_iou()
    return EvalResult(
        pixel_acc=cm.pixel_accuracy(),
        miou=cm.mean_iou(),
        per_class_iou=[float(v) for v in per_class],
        loss=loss_sum / n_pixels,
        n_samples=len(samples),
        confusion=cm,
    )


def predict_masks(model: ModelLike, samples: Sequence[SegSample], batch_size: int = 16) -> List[np.ndarray]:
    """Argmax class-ID masks, one uint8 (H, W) array per sample."""
    dtype = _model_dtype(model)
    masks = []
    for start in range(0, len(samples), batch_size):
        logits = predict(model, stack_images(samples[start:start + batch_size], dtype))
        masks.extend(m.astype(np.uint8) for m in logits.argmax(dim=1).cpu().numpy())
    return masks
