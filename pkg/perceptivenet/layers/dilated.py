"""
Averaged dilated convolution.

Each rate has its own convolution; the first (rate 1) map is kept as is and
the remaining maps are averaged onto it:

    H = H_0 + mean(H_1, ..., H_nd)

The sum is not renormalised, so the output scale can double.
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import torch
import torch.nn as nn

from ..constants import DEFAULT_DILATION_RATES
from ..difftensor import conv2d
from ..exceptions import PerceptiveNetValidationError, ShapeMismatchError
from ..utils.logging import get_logger
from ..utils.validation import validate_odd_size
from .base import BaseLayer, same_padding

logger = get_logger(__name__)


@dataclass(frozen=True)
class DilatedSpec:
    """Ordered dilation rates; the first is 1 and the rest are strictly increasing."""

    rates: Tuple[int, ...] = DEFAULT_DILATION_RATES

    def __post_init__(self):
        object.__setattr__(self, "rates", tuple(int(r) for r in self.rates))

    @property
    def n_d(self) -> int:
        """Number of rates averaged onto the base map."""
        return len(self.rates) - 1

    def validate(self) -> "DilatedSpec":
        rates = self.rates
        if len(rates) < 2:
            logger.error(f"Too few dilation rates: {rates}")
            raise PerceptiveNetValidationError(f"Need at least two dilation rates, got {rates}")
        if rates[0] != 1:
            logger.error(f"First dilation rate must be 1: {rates}")
            raise PerceptiveNetValidationError(f"First dilation rate must be 1, got {rates}")
        if any(b <= a for a, b in zip(rates, rates[1:])):
            logger.error(f"Dilation rates not strictly increasing: {rates}")
            raise PerceptiveNetValidationError(f"Dilation rates must be strictly increasing, got {rates}")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {"rates": list(self.rates), "n_d": self.n_d}


def combine_branch_maps(base: torch.Tensor, others: Sequence[torch.Tensor]) -> torch.Tensor:
    """
    Base map plus the mean of the other maps.

    Raises:
        ShapeMismatchError: If any branch disagrees with the base map's shape
    """
    if not others:
        raise PerceptiveNetValidationError("At least one dilated branch is required")
    for other in others:
        if other.shape != base.shape:
            logger.error(f"Branch map {tuple(other.shape)} does not match base {tuple(base.shape)}")
            raise ShapeMismatchError("dilated branch map", tuple(base.shape), tuple(other.shape))
    return base + torch.stack(list(others), dim=0).mean(dim=0)


def avg_dilated_conv(
    input: torch.Tensor,
    spec: DilatedSpec,
    weights: Sequence[torch.Tensor],
    biases: Optional[Sequence[Optional[torch.Tensor]]] = None,
) -> torch.Tensor:
    """
    Averaged dilated convolution with explicit per-rate weights.

    Args:
        input: (n, c, h, w) tensor
        spec: Dilation rates
        weights: One (o, c, k, k) weight tensor per rate, k odd
        biases: Optional per-rate (o,) biases

    Returns:
        (n, o, h, w) tensor
    """
    spec.validate()
    if len(weights) != len(spec.rates):
        raise ShapeMismatchError("one weight tensor per dilation rate", (len(spec.rates),), (len(weights),))
    biases = list(biases) if biases is not None else [None] * len(weights)
    maps = []
    for rate, weight, bias in zip(spec.rates, weights, biases):
        kernel = validate_odd_size(weight.shape[-1], "dilated kernel_size")
        maps.append(conv2d(input, weight, dilation=rate, padding=same_padding(kernel, rate), bias=bias))
    return combine_branch_maps(maps[0], maps[1:])


class AveragedDilatedConv2d(BaseLayer):
    """Averaged dilated convolution with an independent convolution per rate."""

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        rates: Sequence[int] = DEFAULT_DILATION_RATES,
        kernel_size: int = 3,
    ):
        super().__init__()
        self.spec = DilatedSpec(tuple(rates)).validate()
        self.kernel_size = validate_odd_size(kernel_size, "kernel_size")
        self.branches = nn.ModuleList(
            nn.Conv2d(
                in_channels,
                out_channels,
                kernel_size,
                padding=same_padding(kernel_size, rate),
                dilation=rate,
            )
            for rate in self.spec.rates
        )

    def branch_maps(self, x: torch.Tensor) -> Tuple[torch.Tensor, ...]:
        return tuple(branch(x) for branch in self.branches)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        maps = self.branch_maps(x)
        return combine_branch_maps(maps[0], maps[1:])

    def extra_repr(self) -> str:
        return f"rates={self.spec.rates}, kernel_size={self.kernel_size}"
