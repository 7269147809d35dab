"""
Residual U-shaped segmentation network and its variants.

Layout for depth D: a full-resolution stem, D - 1 downsampling encoder units,
a downsampling bridge, D decoder units and a 1x1 projection to class scores.
Level i carries base_channels * 2**i channels; the decoder unit fed by level
i + 1 consumes the skip from encoder level i.
"""

from collections import OrderedDict
from typing import Dict, List, Tuple

import torch
import torch.nn as nn

from ..exceptions import ShapeMismatchError
from ..layers.base import BaseLayer
from ..layers.blocks import DecoderResBlock, EncoderResBlock, StemBlock
from ..layers.gabor import GaborConv2d
from ..layers.loggabor import LogGaborConv2d
from ..utils.logging import get_logger
from ..utils.validation import validate_shape
from .config import ModelConfig

logger = get_logger(__name__)


class SegModel(nn.Module):
    """
    Segmentation network built from a ModelConfig.

    Attributes:
        config (ModelConfig): Validated configuration
        variant (str): Variant tag
        stem, encoders, bridge, decoders, head: Network stages
    """

    def __init__(self, config: ModelConfig, seed: int = 0):
        super().__init__()
        self.config = config.validate()
        self.variant = config.variant

        rates = config.dilation_rates if config.uses_dilated else None
        self.stem = StemBlock(
            config.in_channels,
            config.channels(0),
            config.resolved_first_layer,
            config.loggabor_kernel,
            seed,
        )
        self.encoders = nn.ModuleList(
            EncoderResBlock(config.channels(i - 1), config.channels(i), config.downsampling, config.mix_alpha, rates)
            for i in range(1, config.depth)
        )
        self.bridge = EncoderResBlock(
            config.channels(config.depth - 1),
            config.channels(config.depth),
            config.downsampling,
            config.mix_alpha,
            rates,
        )
        self.decoders = nn.ModuleList(
            DecoderResBlock(config.channels(i + 1), config.channels(i), config.channels(i), rates)
            for i in reversed(range(config.depth))
        )
        self.head = nn.Conv2d(config.channels(0), config.n_classes, 1)

    def _check_input(self, x: torch.Tensor) -> None:
        validate_shape(x.shape, (None, self.config.in_channels, None, None), "model input")
        divisor = self.config.divisor
        h, w = x.shape[-2:]
        if h % divisor or w % divisor:
            logger.error(f"Input {tuple(x.shape)} not divisible by {divisor}")
            raise ShapeMismatchError(
                f"model input sides must be multiples of {divisor}",
                (None, self.config.in_channels, h - h % divisor, w - w % divisor),
                tuple(x.shape),
            )

    def features(self, x: torch.Tensor) -> torch.Tensor:
        """Final decoder feature maps, (n, base_channels, H, W)."""
        self._check_input(x)
        h = self.stem(x)
        skips = [h]
        for encoder in self.encoders:
            h = encoder(h)
            skips.append(h)
        h = self.bridge(h)
        for decoder, skip in zip(self.decoders, reversed(skips)):
            h = decoder(h, skip)
        return h

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """Per-pixel unnormalised class scores, (n, n_classes, H, W)."""
        return self.head(self.features(x))

    def layer_graph(self) -> List[Tuple[str, str]]:
        """Ordered (qualified name, module kind) pairs of every submodule."""
        return [(name, type(module).__name__) for name, module in self.named_modules() if name]

    def parameter_registry(self) -> Dict[str, nn.Parameter]:
        return OrderedDict(self.named_parameters())

    def n_parameters(self) -> int:
        return sum(p.numel() for p in self.parameters())

    def first_layer_kernels(self) -> torch.Tensor:
        """(out, in, k, k) kernels of the first convolution, detached."""
        first = self.stem.first
        if isinstance(first, (LogGaborConv2d, GaborConv2d)):
            return first.materialise()
        return first.weight.detach().clone()

    def project_(self) -> None:
        """Apply every layer's parameter constraints."""
        for module in self.modules():
            if isinstance(module, BaseLayer):
                module.project_()


def build_model(config: ModelConfig, seed: int = 0) -> SegModel:
    """
    Build a network with deterministic initial parameters.

    The global torch RNG state is left untouched.

    Args:
        config: Model configuration
        seed: Seed of every random initialiser

    Returns:
        SegModel

    Raises:
        ConfigError: If the configuration is invalid
    """
    config.validate()
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        model = SegModel(config, seed)
    logger.info(
        f"Built {config.variant} (first layer {config.resolved_first_layer}, "
        f"{model.n_parameters()} parameters, seed {seed})"
    )
    return model
