"""
Model configuration.
"""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Tuple

from ..constants import (
    DEFAULT_BASE_CHANNELS,
    DEFAULT_DEPTH,
    DEFAULT_DILATION_RATES,
    DEFAULT_LOGGABOR_KERNEL,
    DEFAULT_MIX_ALPHA,
    FirstLayers,
    Variants,
)
from ..exceptions import ConfigError, PerceptiveNetValidationError
from ..layers.blocks import DOWNSAMPLE_MIXPOOL, DOWNSAMPLE_STRIDE
from ..layers.dilated import DilatedSpec
from ..utils.logging import get_logger
from ..utils.validation import validate_odd_size, validate_required_params, validate_unit_interval

logger = get_logger(__name__)


# variant -> (default first layer, downsampling, dilated units)
VARIANT_WIRING = {
    Variants.RESUNET: (FirstLayers.CONV, DOWNSAMPLE_STRIDE, False),
    Variants.DILRESUNET: (FirstLayers.CONV, DOWNSAMPLE_STRIDE, True),
    Variants.LGMPRESUNET: (FirstLayers.LOGGABOR, DOWNSAMPLE_MIXPOOL, False),
    Variants.PERCEPTIVENET: (FirstLayers.LOGGABOR, DOWNSAMPLE_MIXPOOL, True),
}


@dataclass
class ModelConfig:
    """
    Network configuration.

    Attributes:
        variant: One of Variants.ALL
        first_layer: One of FirstLayers.ALL, or None for the variant's default
        base_channels: Stem width; level i has base_channels * 2**i channels
        depth: Number of downsampling steps (encoder levels after the stem plus the bridge)
        n_classes: Output classes including background
        loggabor_kernel: Odd kernel side of the Gabor and Log-Gabor first layers
        mix_alpha: Mixing portion of every mix-pool layer
        dilation_rates: Rates of every averaged dilated unit
        in_channels: Image channels
    """

    variant: str = Variants.PERCEPTIVENET
    first_layer: Optional[str] = None
    base_channels: int = DEFAULT_BASE_CHANNELS
    depth: int = DEFAULT_DEPTH
    n_classes: int = 2
    loggabor_kernel: int = DEFAULT_LOGGABOR_KERNEL
    mix_alpha: float = DEFAULT_MIX_ALPHA
    dilation_rates: Tuple[int, ...] = field(default_factory=lambda: tuple(DEFAULT_DILATION_RATES))
    in_channels: int = 3

    def __post_init__(self):
        self.dilation_rates = tuple(int(r) for r in self.dilation_rates)

    @property
    def resolved_first_layer(self) -> str:
        return self.first_layer or VARIANT_WIRING[self.variant][0]

    @property
    def downsampling(self) -> str:
        return VARIANT_WIRING[self.variant][1]

    @property
    def uses_dilated(self) -> bool:
        return VARIANT_WIRING[self.variant][2]

    @property
    def divisor(self) -> int:
        """Input sides must be multiples of this."""
        return 2 ** self.depth

    def channels(self, level: int) -> int:
        return self.base_channels * 2 ** level

    def validate(self) -> "ModelConfig":
        """
        Check every field and every combination of fields.

        Raises:
            ConfigError: Listing each offending field
        """
        problems = {}
        if self.variant not in Variants.ALL:
            problems["variant"] = f"must be one of {Variants.ALL}"
        if self.first_layer is not None and self.first_layer not in FirstLayers.ALL:
            problems["first_layer"] = f"must be one of {FirstLayers.ALL}"
        if not isinstance(self.n_classes, int) or self.n_classes < 2:
            problems["n_classes"] = "must be an integer >= 2"
        if not isinstance(self.depth, int) or self.depth < 2:
            problems["depth"] = "must be an integer >= 2"
        if not isinstance(self.base_channels, int) or self.base_channels < 4:
            problems["base_channels"] = "must be an integer >= 4"
        if not isinstance(self.in_channels, int) or self.in_channels < 1:
            problems["in_channels"] = "must be an integer >= 1"
        for name, check in (
            ("loggabor_kernel", lambda: validate_odd_size(self.loggabor_kernel, "loggabor_kernel")),
            ("mix_alpha", lambda: validate_unit_interval(self.mix_alpha, "mix_alpha")),
            ("dilation_rates", lambda: DilatedSpec(self.dilation_rates).validate()),
        ):
            try:
                check()
            except PerceptiveNetValidationError as e:
                problems[name] = str(e)

        if "variant" not in problems and "first_layer" not in problems:
            if self.downsampling == DOWNSAMPLE_STRIDE and self.resolved_first_layer != FirstLayers.CONV:
                problems["variant"] = f"{self.variant} is a strided variant with a plain convolution first layer"
                problems["first_layer"] = (
                    f"first-layer comparisons are only defined on the mix-pool variants "
                    f"({Variants.LGMPRESUNET}, {Variants.PERCEPTIVENET}); got {self.first_layer}"
                )

        if problems:
            detail = "; ".join(f"{k}: {v}" for k, v in problems.items())
            logger.error(f"Invalid model config: {detail}")
            raise ConfigError(f"Invalid model config: {detail}", list(problems))
        return self

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["dilation_rates"] = list(self.dilation_rates)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ModelConfig":
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError("Unknown model config fields", unknown)
        validate_required_params(data, ["variant", "n_classes"])
        return cls(**data)
