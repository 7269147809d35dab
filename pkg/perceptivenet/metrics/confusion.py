"""
Confusion-matrix accumulation, pixel accuracy and mean IoU.
"""

from typing import Union

import numpy as np
import torch

from ..exceptions import MetricsError
from ..utils.logging import get_logger

logger = get_logger(__name__)

ArrayLike = Union[np.ndarray, torch.Tensor]


def _as_ids(mask: ArrayLike) -> np.ndarray:
    if torch.is_tensor(mask):
        mask = mask.detach().cpu().numpy()
    return np.asarray(mask).astype(np.int64, copy=False)


class ConfusionMatrix:
    """
    Integer confusion matrix; rows are ground truth, columns are predictions.

    Attributes:
        n_classes (int): Number of classes including background
        counts (np.ndarray): (n_classes, n_classes) int64 counts
    """

    def __init__(self, n_classes: int):
        if n_classes < 2:
            raise MetricsError(f"A confusion matrix needs at least 2 classes, got {n_classes}")
        self.n_classes = int(n_classes)
        self.counts = np.zeros((self.n_classes, self.n_classes), dtype=np.int64)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def update(self, pred_mask: ArrayLike, true_mask: ArrayLike) -> "ConfusionMatrix":
        """
        Add one count per pixel at [true, pred].

        Raises:
            MetricsError: On shape mismatch or an ID outside [0, n_classes)
        """
        pred = _as_ids(pred_mask)
        true = _as_ids(true_mask)
        if pred.shape != true.shape:
            logger.error(f"Prediction {pred.shape} and truth {true.shape} differ in shape")
            raise MetricsError(f"Prediction shape {pred.shape} does not match truth shape {true.shape}")
        for name, ids in (("prediction", pred), ("truth", true)):
            if ids.size and (ids.min() < 0 or ids.max() >= self.n_classes):
                logger.error(f"{name} IDs outside [0, {self.n_classes})")
                raise MetricsError(f"{name} contains class IDs outside [0, {self.n_classes})")
        flat = self.n_classes * true.ravel() + pred.ravel()
        self.counts += np.bincount(flat, minlength=self.n_classes ** 2).reshape(self.n_classes, self.n_classes)
        return self

    def merge(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        """Elementwise sum of two matrices, as a new matrix."""
        if other.n_classes != self.n_classes:
            raise MetricsError(f"Cannot merge {self.n_classes}-class and {other.n_classes}-class matrices")
        merged = ConfusionMatrix(self.n_classes)
        merged.counts = self.counts + other.counts
        return merged

    def _require_counts(self) -> None:
        if self.total == 0:
            raise MetricsError("Confusion matrix is empty")

    def pixel_accuracy(self) -> float:
        """Trace over total."""
        self._require_counts()
        return float(np.trace(self.counts)) / float(self.total)

    def per_class_iou(self) -> np.ndarray:
        """IoU per class; NaN where the class is absent from both truth and prediction."""
        self._require_counts()
        intersection = np.diag(self.counts).astype(np.float64)
        union = self.counts.sum(axis=0) + self.counts.sum(axis=1) - np.diag(self.counts)
        iou = np.full(self.n_classes, np.nan)
        present = union > 0
        iou[present] = intersection[present] / union[present]
        return iou

    def mean_iou(self) -> float:
        """Mean IoU over classes with a nonzero union."""
        iou = self.per_class_iou()
        present = ~np.isnan(iou)
        if not present.any():
            raise MetricsError("Every class has zero union")
        return float(np.mean(iou[present]))

    def reset(self) -> None:
        self.counts[:] = 0

    def __repr__(self) -> str:
        return f"ConfusionMatrix(n_classes={self.n_classes}, total={self.total})"


def update(cm: ConfusionMatrix, pred_mask: ArrayLike, true_mask: ArrayLike) -> None:
    cm.update(pred_mask, true_mask)


def pixel_accuracy(cm: ConfusionMatrix) -> float:
    return cm.pixel_accuracy()


def mean_iou(cm: ConfusionMatrix) -> float:
    return cm.mean_iou()
