"""
Layers of the PerceptiveNet segmentation network.
"""

from .base import BaseLayer, PreActivation
from .blocks import DecoderResBlock, EncoderResBlock, StemBlock, first_layer
from .dilated import AveragedDilatedConv2d, DilatedSpec, avg_dilated_conv, combine_branch_maps
from .gabor import GaborConv2d
from .loggabor import LogGaborConv2d, LogGaborKernels, log_gabor_conv_forward
from .pooling import MixPool2d, MixPoolSpec, mix_pool

__all__ = [
    "AveragedDilatedConv2d",
    "BaseLayer",
    "DecoderResBlock",
    "DilatedSpec",
    "EncoderResBlock",
    "GaborConv2d",
    "LogGaborConv2d",
    "LogGaborKernels",
    "MixPool2d",
    "MixPoolSpec",
    "PreActivation",
    "StemBlock",
    "avg_dilated_conv",
    "combine_branch_maps",
    "first_layer",
    "log_gabor_conv_forward",
    "mix_pool",
]
