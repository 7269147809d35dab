"""
Run configuration files.

A run file holds one dotted ``key=value`` pair per line with ``#`` comments:

    model.variant=perceptivenet
    dilated.rates=1,3,6,9
    train.epochs=30

Values are layered: built-in defaults, then the file, then command-line flags.
"""

from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Tuple, Union

from dotenv import dotenv_values

from .constants import (
    DEFAULT_BASE_CHANNELS,
    DEFAULT_BATCH_SIZE,
    DEFAULT_DEPTH,
    DEFAULT_DILATION_RATES,
    DEFAULT_EPOCHS,
    DEFAULT_LOGGABOR_KERNEL,
    DEFAULT_LR,
    DEFAULT_MIX_ALPHA,
    Variants,
)
from .data.synthetic import SynthSpec
from .exceptions import ConfigError
from .models.config import ModelConfig
from .training.config import TrainConfig
from .utils.logging import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]

SYNTH_PREFIX = "data.synth."

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def parse_bool(value: str) -> bool:
    text = str(value).strip().lower()
    if text in _TRUE:
        return True
    if text in _FALSE:
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


def parse_int_list(value: str) -> Tuple[int, ...]:
    return tuple(int(part) for part in str(value).split(",") if part.strip())


def parse_optional_str(value: str) -> Optional[str]:
    text = str(value).strip()
    return None if text.lower() in ("", "none", "default") else text


def parse_optional_path(value: str) -> Optional[Path]:
    text = str(value).strip()
    return Path(text) if text else None


_synth = SynthSpec()

# key -> (parser, default)
SCHEMA: Dict[str, Tuple[Callable[[str], Any], Any]] = {
    "model.variant": (str, Variants.PERCEPTIVENET),
    "model.first_layer": (parse_optional_str, None),
    "model.base_channels": (int, DEFAULT_BASE_CHANNELS),
    "model.depth": (int, DEFAULT_DEPTH),
    "model.n_classes": (int, _synth.n_classes),
    "loggabor.kernel_size": (int, DEFAULT_LOGGABOR_KERNEL),
    "mixpool.alpha": (float, DEFAULT_MIX_ALPHA),
    "dilated.rates": (parse_int_list, tuple(DEFAULT_DILATION_RATES)),
    "train.epochs": (int, DEFAULT_EPOCHS),
    "train.batch_size": (int, DEFAULT_BATCH_SIZE),
    "train.lr": (float, DEFAULT_LR),
    "train.seed": (int, 0),
    "train.eval_every": (int, 1),
    "train.dtype": (str, "float32"),
    "train.augment": (parse_bool, True),
    "data.root": (parse_optional_path, None),
    "data.synth.n_samples": (int, _synth.n_samples),
    "data.synth.image_size": (int, _synth.image_size),
    "data.synth.blob_count_min": (int, _synth.blob_count_min),
    "data.synth.blob_count_max": (int, _synth.blob_count_max),
    "data.synth.blob_radius_min": (float, _synth.blob_radius_min),
    "data.synth.blob_radius_max": (float, _synth.blob_radius_max),
    "data.synth.noise": (float, _synth.noise),
    "data.synth.shadow_probability": (float, _synth.shadow_probability),
    "data.synth.overlap": (parse_bool, _synth.overlap),
}

DEFAULTS: Dict[str, Any] = {key: default for key, (_, default) in SCHEMA.items()}


def parse_values(raw: Mapping[str, Any], source: str = "<config>") -> Dict[str, Any]:
    """
    Convert raw values with each key's parser.

    String values are parsed; anything else is taken as already typed.

    Raises:
        ConfigError: Naming unknown keys or keys whose values do not parse
    """
    unknown = sorted(set(raw) - set(SCHEMA))
    if unknown:
        logger.error(f"Unknown config keys in {source}: {unknown}")
        raise ConfigError(f"Unknown config keys in {source}: {', '.join(unknown)}", unknown)

    values, bad = {}, {}
    for key, value in raw.items():
        if value is None:
            continue
        parser = SCHEMA[key][0]
        try:
            values[key] = parser(value) if isinstance(value, str) else value
        except ValueError as e:
            bad[key] = str(e)
    if bad:
        detail = "; ".join(f"{k}: {v}" for k, v in bad.items())
        logger.error(f"Unparseable config values in {source}: {detail}")
        raise ConfigError(f"Invalid config values in {source}: {detail}", list(bad))
    return values


class RunConfig:
    """
    Layered run configuration.

    Attributes:
        values (dict): Every known key with its effective value
        sources (list): Where non-default layers came from, oldest first
    """

    def __init__(self, values: Optional[Mapping[str, Any]] = None, sources=None):
        self.values = dict(DEFAULTS)
        self.values.update(parse_values(values or {}))
        self.sources = list(sources or [])

    @classmethod
    def from_file(cls, path: PathLike) -> "RunConfig":
        """
        Load a run file on top of the defaults.

        Raises:
            ConfigError: If the file is missing or holds unknown or invalid keys
        """
        path = Path(path)
        if not path.is_file():
            logger.error(f"Config file not found: {path}")
            raise ConfigError(f"Config file not found: {path}", ["config"])
        raw = dotenv_values(path, interpolate=False)
        config = cls(parse_values(raw, str(path)), [str(path)])
        logger.info(f"Loaded {len(raw)} config keys from {path}")
        return config

    def merge(self, overrides: Mapping[str, Any], source: str = "flags") -> "RunConfig":
        """A new RunConfig with ``overrides`` applied; None values are ignored."""
        applied = {k: v for k, v in overrides.items() if v is not None}
        merged = RunConfig(sources=self.sources + [source])
        merged.values = dict(self.values)
        merged.values.update(parse_values(applied, source))
        return merged

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def get(self, key: str, default: Any = None) -> Any:
        return self.values.get(key, default)

    @property
    def seed(self) -> int:
        return self.values["train.seed"]

    @property
    def data_root(self) -> Optional[Path]:
        return self.values["data.root"]

    def model_config(self, variant: Optional[str] = None, first_layer: Optional[str] = None) -> ModelConfig:
        """ModelConfig from the ``model.*``, ``loggabor.*``, ``mixpool.*`` and ``dilated.*`` keys."""
        v = self.values
        return ModelConfig(
            variant=variant or v["model.variant"],
            first_layer=first_layer or v["model.first_layer"],
            base_channels=v["model.base_channels"],
            depth=v["model.depth"],
            n_classes=v["model.n_classes"],
            loggabor_kernel=v["loggabor.kernel_size"],
            mix_alpha=v["mixpool.alpha"],
            dilation_rates=v["dilated.rates"],
        ).validate()

    def train_config(self, checkpoint_path: Optional[PathLike] = None) -> TrainConfig:
        v = self.values
        return TrainConfig(
            epochs=v["train.epochs"],
            batch_size=v["train.batch_size"],
            lr=v["train.lr"],
            seed=v["train.seed"],
            checkpoint_path=Path(checkpoint_path) if checkpoint_path else None,
            eval_every=v["train.eval_every"],
            augment=v["train.augment"],
            dtype=v["train.dtype"],
        ).validate()

    def synth_spec(self) -> SynthSpec:
        """SynthSpec from ``data.synth.*``; the class count is ``model.n_classes``."""
        fields = {key[len(SYNTH_PREFIX):]: value for key, value in self.values.items() if key.startswith(SYNTH_PREFIX)}
        return SynthSpec(n_classes=self.values["model.n_classes"], **fields).validate()

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.values)

    def __repr__(self) -> str:
        return f"RunConfig(sources={self.sources})"
