"""
Datasets: synthetic generation, on-disk loading, augmentation and splitting.
"""

from .augment import Transform, apply_transform, augment, draw_transform
from .base import SegSample, stack_images, stack_masks
from .loader import load_dataset, save_dataset
from .split import DatasetSplits, split, split_sizes
from .synthetic import SynthSpec, generate_synthetic

__all__ = [
    "DatasetSplits",
    "SegSample",
    "SynthSpec",
    "Transform",
    "apply_transform",
    "augment",
    "draw_transform",
    "generate_synthetic",
    "load_dataset",
    "save_dataset",
    "split",
    "split_sizes",
    "stack_images",
    "stack_masks",
]
