"""
Segmentation metrics and class activation maps.
"""

from .cam import colourise, compute_cam, overlay, save_cam
from .confusion import ConfusionMatrix, mean_iou, pixel_accuracy, update

__all__ = [
    "ConfusionMatrix",
    "colourise",
    "compute_cam",
    "mean_iou",
    "overlay",
    "pixel_accuracy",
    "save_cam",
    "update",
]
