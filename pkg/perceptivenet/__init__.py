"""
PerceptiveNet - trainable Log-Gabor segmentation networks.

This package provides the layers, network variants, training recipe, metrics
and experiment tooling of a residual U-shaped segmentation network whose first
layer is a bank of learnable Log-Gabor filters.
"""

from .config import RunConfig
from .experiment import Experiment
from .models import ModelConfig, build_model
from .training import TrainConfig, train

__version__ = '0.1.0'
__all__ = ['Experiment', 'ModelConfig', 'RunConfig', 'TrainConfig', 'build_model', 'train']
