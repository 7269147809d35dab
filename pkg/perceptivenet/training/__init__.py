"""
Loss, optimiser, training loop and evaluation.
"""

from .config import TrainConfig
from .evaluate import EvalResult, evaluate, predict_masks
from .loss import cross_entropy_loss
from .optim import AdamState, adam_step
from .trainer import EpochRecord, TrainHistory, train

__all__ = [
    "AdamState",
    "EpochRecord",
    "EvalResult",
    "TrainConfig",
    "TrainHistory",
    "adam_step",
    "cross_entropy_loss",
    "evaluate",
    "predict_masks",
    "train",
]
