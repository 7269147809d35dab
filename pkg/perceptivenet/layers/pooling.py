"""
Mixed max/average pooling.
"""

from dataclasses import asdict, dataclass
from typing import Any, Dict

import torch
import torch.nn.functional as F

from ..constants import DEFAULT_MIX_ALPHA, DEFAULT_POOL_STRIDE, DEFAULT_POOL_WINDOW
from ..exceptions import ShapeMismatchError
from ..utils.logging import get_logger
from ..utils.validation import validate_min_int, validate_unit_interval
from .base import BaseLayer

logger = get_logger(__name__)


@dataclass(frozen=True)
class MixPoolSpec:
    """Mixing portion alpha in [0, 1] with a square pooling window and stride."""

    alpha: float = DEFAULT_MIX_ALPHA
    window: int = DEFAULT_POOL_WINDOW
    stride: int = DEFAULT_POOL_STRIDE

    def validate(self) -> "MixPoolSpec":
        validate_unit_interval(self.alpha, "alpha")
        validate_min_int(self.window, 1, "window")
        validate_min_int(self.stride, 1, "stride")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def mix_pool(input: torch.Tensor, spec: MixPoolSpec = MixPoolSpec()) -> torch.Tensor:
    """
    alpha * max_pool + (1 - alpha) * avg_pool over non-padded windows.

    Args:
        input: (n, c, h, w) tensor
        spec: Pooling spec

    Returns:
        (n, c, h', w') tensor, h' = (h - window) // stride + 1

    Raises:
        ShapeMismatchError: If h or w is not divisible by the stride
    """
    spec.validate()
    if input.dim() != 4:
        raise ShapeMismatchError("mix_pool expects NCHW input", ("n", "c", "h", "w"), tuple(input.shape))
    h, w = input.shape[-2:]
    if h % spec.stride or w % spec.stride or h < spec.window or w < spec.window:
        logger.error(f"mix_pool input {tuple(input.shape)} not divisible by stride {spec.stride}")
        raise ShapeMismatchError(
            f"mix_pool needs spatial dims divisible by stride {spec.stride}",
            (None, None, h - h % spec.stride, w - w % spec.stride),
            tuple(input.shape),
        )
    if spec.alpha == 1.0:
        return F.max_pool2d(input, spec.window, spec.stride)
    if spec.alpha == 0.0:
        return F.avg_pool2d(input, spec.window, spec.stride)
    maxed = F.max_pool2d(input, spec.window, spec.stride)
    averaged = F.avg_pool2d(input, spec.window, spec.stride)
    return spec.alpha * maxed + (1.0 - spec.alpha) * averaged


class MixPool2d(BaseLayer):
    """Module wrapper around ``mix_pool`` with a fixed spec."""

    def __init__(self, alpha: float = DEFAULT_MIX_ALPHA, window: int = DEFAULT_POOL_WINDOW, stride: int = DEFAULT_POOL_STRIDE):
        super().__init__()
        self.spec = MixPoolSpec(alpha, window, stride).validate()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return mix_pool(x, self.spec)

    def extra_repr(self) -> str:
        return f"alpha={self.spec.alpha}, window={self.spec.window}, stride={self.spec.stride}"
