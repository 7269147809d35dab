"""
Pixel-wise cross-entropy.
"""

import torch
import torch.nn.functional as F

from ..exceptions import PerceptiveNetValidationError, ShapeMismatchError
from ..utils.logging import get_logger

logger = get_logger(__name__)


def cross_entropy_loss(logits: torch.Tensor, true_mask: torch.Tensor) -> torch.Tensor:
    """
    Mean over pixels of -log softmax(logits) at the true class.

    Args:
        logits: (n, k, H, W) unnormalised scores
        true_mask: (n, H, W) integer class IDs in [0, k)

    Returns:
        Scalar tensor

    Raises:
        ShapeMismatchError: If the mask does not match the logits
        PerceptiveNetValidationError: On class IDs outside [0, k)
    """
    if logits.dim() != 4:
        raise ShapeMismatchError("logits must be (n, k, H, W)", ("n", "k", "h", "w"), tuple(logits.shape))
    expected = (logits.shape[0], logits.shape[2], logits.shape[3])
    if tuple(true_mask.shape) != expected:
        raise ShapeMismatchError("mask does not match logits", expected, tuple(true_mask.shape))
    target = true_mask.long()
    n_classes = logits.shape[1]
    if target.numel() and (int(target.min()) < 0 or int(target.max()) >= n_classes):
        logger.error(f"Mask IDs outside [0, {n_classes})")
        raise PerceptiveNetValidationError(f"Mask contains class IDs outside [0, {n_classes})")
    return F.cross_entropy(logits, target, reduction="mean")
