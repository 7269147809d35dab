"""
Network assembly and persistence.
"""

from .checkpoint import load_checkpoint, restore_checkpoint, save_checkpoint
from .config import VARIANT_WIRING, ModelConfig
from .segmodel import SegModel, build_model

__all__ = [
    "VARIANT_WIRING",
    "ModelConfig",
    "SegModel",
    "build_model",
    "load_checkpoint",
    "restore_checkpoint",
    "save_checkpoint",
]
