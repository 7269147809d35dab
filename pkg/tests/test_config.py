"""
Tests for run configuration files.
"""

from pathlib import Path

import pytest

from perceptivenet.config import (
    DEFAULTS,
    RunConfig,
    parse_bool,
    parse_int_list,
    parse_optional_path,
    parse_optional_str,
)
from perceptivenet.constants import FirstLayers, Variants
from perceptivenet.exceptions import ConfigError


@pytest.fixture
def run_file(tmp_path):
    """Fixture writing a small run file."""
    path = tmp_path / "run.cfg"
    path.write_text(
        "# ablation recipe\n"
        "model.variant=lgmpresunet\n"
        "dilated.rates=1,2,4\n"
        "train.epochs=5\n"
        "train.augment=false\n"
        "model.first_layer=gabor\n"
    )
    return path


class TestParsers:
    """Tests for the value parsers."""

    @pytest.mark.parametrize("text, expected", [("true", True), ("YES", True), ("1", True), ("off", False), ("0", False)])
    def test_parse_bool(self, text, expected):
        """Test accepted boolean spellings."""
        assert parse_bool(text) is expected

    def test_parse_bool_rejects(self):
        """Test other strings are not booleans."""
        with pytest.raises(ValueError):
            parse_bool("maybe")

    def test_parse_int_list(self):
        """Test comma lists with spaces and a trailing comma."""
        assert parse_int_list("1, 3,6,9,") == (1, 3, 6, 9)

    def test_optional_values(self):
        """Test empty, none and default mean unset."""
        assert parse_optional_str("default") is None
        assert parse_optional_str(" None ") is None
        assert parse_optional_str("gabor") == "gabor"
        assert parse_optional_path("") is None
        assert parse_optional_path("data") == Path("data")


class TestRunConfig:
    """Tests for RunConfig."""

    def test_defaults(self):
        """Test the built-in defaults."""
        config = RunConfig()
        assert config["model.variant"] == Variants.PERCEPTIVENET
        assert config["mixpool.alpha"] == 0.8
        assert config["dilated.rates"] == (1, 3, 6, 9)
        assert config["train.epochs"] == 130
        assert config.seed == 0
        assert config.data_root is None
        assert config.to_dict() == DEFAULTS

    def test_from_file(self, run_file):
        """Test file values are parsed by key and the rest stay default."""
        config = RunConfig.from_file(run_file)
        assert config["model.variant"] == Variants.LGMPRESUNET
        assert config["dilated.rates"] == (1, 2, 4)
        assert config["train.epochs"] == 5
        assert config["train.augment"] is False
        assert config["train.batch_size"] == 16
        assert config.sources == [str(run_file)]

    def test_flags_override_file(self, run_file):
        """Test flags take precedence over the file, which takes precedence over defaults."""
        config = RunConfig.from_file(run_file).merge({"train.epochs": "7", "train.lr": None})
        assert config["train.epochs"] == 7
        assert config["train.lr"] == 1e-3
        assert config.sources == [str(run_file), "flags"]

    def test_merge_returns_new_config(self):
        """Test merging leaves the original untouched."""
        base = RunConfig()
        merged = base.merge({"train.seed": 4})
        assert base.seed == 0 and merged.seed == 4

    def test_missing_file(self, tmp_path):
        """Test a missing file raises ConfigError."""
        with pytest.raises(ConfigError) as exc_info:
            RunConfig.from_file(tmp_path / "absent.cfg")
        assert exc_info.value.fields == ["config"]

    def test_unknown_keys_listed(self, tmp_path):
        """Test unknown keys are named."""
        path = tmp_path / "bad.cfg"
        path.write_text("train.epochs=3\ntrain.momentum=0.9\nmodel.width=8\n")
        with pytest.raises(ConfigError) as exc_info:
            RunConfig.from_file(path)
        assert exc_info.value.fields == ["model.width", "train.momentum"]

    def test_unparseable_values_listed(self, tmp_path):
        """Test values that do not parse are named."""
        path = tmp_path / "bad.cfg"
        path.write_text("train.epochs=many\ntrain.augment=perhaps\n")
        with pytest.raises(ConfigError) as exc_info:
            RunConfig.from_file(path)
        assert sorted(exc_info.value.fields) == ["train.augment", "train.epochs"]


class TestDerivedConfigs:
    """Tests for the typed configurations built from a RunConfig."""

    def test_model_config(self, run_file):
        """Test model keys map onto ModelConfig."""
        config = RunConfig.from_file(run_file).model_config()
        assert config.variant == Variants.LGMPRESUNET
        assert config.resolved_first_layer == FirstLayers.GABOR
        assert config.dilation_rates == (1, 2, 4)

    def test_model_overrides(self):
        """Test the variant and first layer can be overridden per call."""
        config = RunConfig().model_config(Variants.RESUNET)
        assert config.resolved_first_layer == FirstLayers.CONV

    def test_invalid_combination(self):
        """Test a Log-Gabor first layer on a strided variant is rejected."""
        config = RunConfig({"model.variant": "resunet", "model.first_layer": "loggabor"})
        with pytest.raises(ConfigError) as exc_info:
            config.model_config()
        assert exc_info.value.fields == ["variant", "first_layer"]
        assert "only defined on the mix-pool variants (lgmpresunet, perceptivenet)" in str(exc_info.value)

    def test_train_config(self, run_file, tmp_path):
        """Test training keys map onto TrainConfig."""
        config = RunConfig.from_file(run_file).train_config(tmp_path / "c.pnet")
        assert config.epochs == 5
        assert config.augment is False
        assert config.checkpoint_path == tmp_path / "c.pnet"

    def test_synth_spec_uses_model_classes(self):
        """Test the synthetic class count follows model.n_classes."""
        spec = RunConfig({"model.n_classes": "5", "data.synth.n_samples": "12"}).synth_spec()
        assert spec.n_classes == 5
        assert spec.n_samples == 12
