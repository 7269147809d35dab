"""
Residual units of the encoder, bridge and decoder.

Every unit is ``branch(x) + shortcut(x)``. Inside the branch each convolution
is preceded by batch normalisation and ReLU; nothing follows the addition.
Shortcuts are 1x1 convolutions carrying the same downsampling as the branch.
Convolutions whose output goes into batch normalisation have no bias.
"""

from typing import Optional, Sequence

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..constants import DEFAULT_LOGGABOR_KERNEL, DEFAULT_MIX_ALPHA, FirstLayers
from ..exceptions import ConfigError, ShapeMismatchError
from .base import BaseLayer, PreActivation
from .dilated import AveragedDilatedConv2d
from .gabor import GaborConv2d
from .loggabor import LogGaborConv2d
from .pooling import MixPool2d

DOWNSAMPLE_MIXPOOL = "mixpool"
DOWNSAMPLE_STRIDE = "stride"


def conv3x3(in_channels: int, out_channels: int, stride: int = 1, bias: bool = True) -> nn.Conv2d:
    return nn.Conv2d(in_channels, out_channels, 3, stride=stride, padding=1, bias=bias)


def first_layer(kind: str, in_channels: int, out_channels: int, kernel_size: int = DEFAULT_LOGGABOR_KERNEL, seed: int = 0) -> nn.Module:
    """
    Build the network's first convolution.

    Args:
        kind: One of FirstLayers.ALL
        in_channels: Image channels
        out_channels: Stem width
        kernel_size: Kernel side for the Gabor and Log-Gabor layers
        seed: Seed of the filter-bank phase draw

    Raises:
        ConfigError: On an unknown kind
    """
    if kind == FirstLayers.LOGGABOR:
        return LogGaborConv2d(in_channels, out_channels, kernel_size, seed=seed)
    if kind == FirstLayers.GABOR:
        return GaborConv2d(in_channels, out_channels, kernel_size, seed=seed)
    if kind == FirstLayers.CONV:
        return conv3x3(in_channels, out_channels, bias=False)
    raise ConfigError(f"Unknown first layer {kind!r}, expected one of {FirstLayers.ALL}", ["model.first_layer"])


def _dilated_unit(channels: int, rates: Optional[Sequence[int]]) -> list:
    """Pre-activated averaged dilated convolution, or nothing when no rates are given."""
    if not rates:
        return []
    return [PreActivation(channels), AveragedDilatedConv2d(channels, channels, rates)]


class ResidualUnit(BaseLayer):
    """Common ``branch(x) + shortcut(x)`` wiring."""

    branch: nn.Sequential
    shortcut: nn.Sequential

    @property
    def has_dilated(self) -> bool:
        return any(isinstance(m, AveragedDilatedConv2d) for m in self.branch)

    def residual(self, x: torch.Tensor) -> torch.Tensor:
        return self.branch(x) + self.shortcut(x)


class StemBlock(ResidualUnit):
    """
    First encoder level at full resolution.

    The first layer (plain, Gabor or Log-Gabor convolution) opens the branch;
    the shortcut projects the image with a 1x1 convolution.
    """

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kind: str = FirstLayers.CONV,
        kernel_size: int = DEFAULT_LOGGABOR_KERNEL,
        seed: int = 0,
    ):
        super().__init__()
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kind = kind
        self.branch = nn.Sequential(
            first_layer(kind, in_channels, out_channels, kernel_size, seed),
            PreActivation(out_channels),
            conv3x3(out_channels, out_channels),
        )
        self.shortcut = nn.Sequential(nn.Conv2d(in_channels, out_channels, 1))

    @property
    def first(self) -> nn.Module:
        return self.branch[0]

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        self._require_channels(x, self.in_channels)
        return self.residual(x)


class EncoderResBlock(ResidualUnit):
    """
    Encoder (and bridge) unit that halves the spatial dims.

    With ``downsample="mixpool"`` the branch is conv(stride 1), mix pool, conv;
    with ``downsample="stride"`` the first conv has stride 2 instead. When
    ``dilation_rates`` is given the branch ends with an averaged dilated unit.
    """

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        downsample: str = DOWNSAMPLE_MIXPOOL,
        mix_alpha: float = DEFAULT_MIX_ALPHA,
        dilation_rates: Optional[Sequence[int]] = None,
    ):
        super().__init__()
        if downsample not in (DOWNSAMPLE_MIXPOOL, DOWNSAMPLE_STRIDE):
            raise ConfigError(f"Unknown downsampling {downsample!r}", ["downsample"])
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.downsample = downsample

        stride = 2 if downsample == DOWNSAMPLE_STRIDE else 1
        layers = [PreActivation(in_channels), conv3x3(in_channels, out_channels, stride, bias=False)]
        shortcut = [nn.Conv2d(in_channels, out_channels, 1, stride=stride)]
        if downsample == DOWNSAMPLE_MIXPOOL:
            layers.append(MixPool2d(mix_alpha))
            shortcut.append(MixPool2d(mix_alpha))
        layers += [PreActivation(out_channels), conv3x3(out_channels, out_channels, bias=not dilation_rates)]
        layers += _dilated_unit(out_channels, dilation_rates)

        self.branch = nn.Sequential(*layers)
        self.shortcut = nn.Sequential(*shortcut)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        self._require_channels(x, self.in_channels)
        self._require_even(x)
        return self.residual(x)


class DecoderResBlock(ResidualUnit):
    """
    Decoder unit: nearest x2 upsampling, concatenation with the encoder skip,
    then two convolutions and an optional averaged dilated unit.
    """

    def __init__(
        self,
        in_channels: int,
        skip_channels: int,
        out_channels: int,
        dilation_rates: Optional[Sequence[int]] = None,
    ):
        super().__init__()
        self.in_channels = in_channels
        self.skip_channels = skip_channels
        self.out_channels = out_channels
        self.concat_channels = in_channels + skip_channels

        cat = self.concat_channels
        layers = [
            PreActivation(cat),
            conv3x3(cat, out_channels, bias=False),
            PreActivation(out_channels),
            conv3x3(out_channels, out_channels, bias=not dilation_rates),
        ]
        layers += _dilated_unit(out_channels, dilation_rates)
        self.branch = nn.Sequential(*layers)
        self.shortcut = nn.Sequential(nn.Conv2d(cat, out_channels, 1))

    def concat(self, x: torch.Tensor, skip: torch.Tensor) -> torch.Tensor:
        """Upsample ``x`` by two and stack it on top of ``skip`` along channels."""
        self._require_channels(x, self.in_channels)
        self._require_channels(skip, self.skip_channels)
        expected = (x.shape[0], self.skip_channels, 2 * x.shape[2], 2 * x.shape[3])
        if tuple(skip.shape) != expected:
            self.logger.error(f"Skip {tuple(skip.shape)} does not match upsampled input {tuple(x.shape)}")
            raise ShapeMismatchError("decoder skip must be twice the input's spatial dims", expected, tuple(skip.shape))
        upsampled = F.interpolate(x, scale_factor=2, mode="nearest")
        return torch.cat([upsampled, skip], dim=1)

    def forward(self, x: torch.Tensor, skip: torch.Tensor) -> torch.Tensor:
        return self.residual(self.concat(x, skip))
