"""
Tests for the command-line interface.
"""

from unittest.mock import MagicMock, patch

import pytest

from perceptivenet import cli
from perceptivenet.difftensor import GradCheckReport, GradCheckResult
from perceptivenet.exceptions import ConfigError


def parse(argv):
    return cli.build_parser().parse_args(argv)


class TestParser:
    """Tests for argument parsing."""

    def test_help_exits_zero(self, capsys):
        """Test --help prints usage and exits 0."""
        with pytest.raises(SystemExit) as exc_info:
            cli.main(["--help"])
        assert exc_info.value.code == 0
        assert "gradcheck" in capsys.readouterr().out

    def test_command_required(self):
        """Test a missing subcommand is a usage error."""
        with pytest.raises(SystemExit) as exc_info:
            cli.main([])
        assert exc_info.value.code == cli.EXIT_VALIDATION

    def test_eval_needs_checkpoint(self):
        """Test eval without --checkpoint is a usage error."""
        with pytest.raises(SystemExit) as exc_info:
            parse(["eval"])
        assert exc_info.value.code == cli.EXIT_VALIDATION

    def test_unknown_variant(self):
        """Test variants are restricted to the four known names."""
        with pytest.raises(SystemExit) as exc_info:
            cli.main(["train", "--variant", "unet"])
        assert exc_info.value.code == cli.EXIT_VALIDATION

    def test_bad_number_exits_1(self, capsys):
        """Test an unparseable number is a usage error with the validation exit code."""
        with pytest.raises(SystemExit) as exc_info:
            cli.main(["synth", "--n-samples", "abc"])
        assert exc_info.value.code == cli.EXIT_VALIDATION
        assert "--n-samples" in capsys.readouterr().err


class TestResolveConfig:
    """Tests for resolve_config."""

    def test_flags_override_file(self, tmp_path):
        """Test flag values win over the run file."""
        path = tmp_path / "run.cfg"
        path.write_text("train.epochs=5\ntrain.batch_size=4\n")
        config = cli.resolve_config(parse(["train", "--config", str(path), "--epochs", "9"]))
        assert config["train.epochs"] == 9
        assert config["train.batch_size"] == 4

    def test_flag_mapping(self):
        """Test flags land on their dotted keys."""
        args = parse(["train", "--seed", "3", "--rates", "1,2", "--alpha", "0.5", "--no-augment", "--dtype", "float64"])
        config = cli.resolve_config(args)
        assert config.seed == 3
        assert config["dilated.rates"] == (1, 2)
        assert config["mixpool.alpha"] == 0.5
        assert config["train.augment"] is False
        assert config["train.dtype"] == "float64"

    def test_unset_flags_keep_defaults(self):
        """Test flags that were not given do not override anything."""
        config = cli.resolve_config(parse(["train"]))
        assert config["train.augment"] is True
        assert config["model.variant"] == "perceptivenet"


class TestMain:
    """Tests for command dispatch and exit codes."""

    @patch("perceptivenet.cli.Experiment")
    def test_train_dispatch(self, experiment_cls, tmp_path):
        """Test train calls Experiment.train and exits 0."""
        assert cli.main(["train", "--out", str(tmp_path)]) == cli.EXIT_OK
        experiment_cls.return_value.train.assert_called_once_with()

    @patch("perceptivenet.cli.Experiment")
    def test_ablate_dispatch(self, experiment_cls, tmp_path):
        """Test both ablate spellings run every variant."""
        cli.main(["ablate", "--out", str(tmp_path)])
        cli.main(["train", "--ablate", "--out", str(tmp_path)])
        assert experiment_cls.return_value.ablate.call_count == 2

    @patch("perceptivenet.cli.Experiment")
    def test_eval_dispatch(self, experiment_cls, tmp_path):
        """Test eval forwards the checkpoint and split."""
        cli.main(["eval", "--checkpoint", "c.pnet", "--split", "val", "--out", str(tmp_path)])
        args = experiment_cls.return_value.evaluate.call_args[0]
        assert (str(args[0]), args[1]) == ("c.pnet", "val")

    @patch("perceptivenet.cli.Experiment")
    def test_validation_error_exits_1(self, experiment_cls, tmp_path, capsys):
        """Test validation errors exit 1 with the message on stderr."""
        experiment_cls.return_value.train.side_effect = ConfigError("bad variant", ["model.variant"])
        assert cli.main(["train", "--out", str(tmp_path)]) == cli.EXIT_VALIDATION
        assert "error: bad variant" in capsys.readouterr().err

    @patch("perceptivenet.cli.Experiment")
    def test_runtime_error_exits_2(self, experiment_cls, tmp_path):
        """Test other failures exit 2."""
        experiment_cls.return_value.train.side_effect = RuntimeError("disk full")
        assert cli.main(["train", "--out", str(tmp_path)]) == cli.EXIT_FAILURE

    @patch("perceptivenet.cli.Experiment")
    def test_gradcheck_failure_exits_2(self, experiment_cls, tmp_path, capsys):
        """Test a failed gradient check prints the report and exits 2."""
        failing = GradCheckReport("mix_pool", [GradCheckResult("input", 3e-2, False, 32)])
        experiment_cls.return_value.gradcheck.return_value = [failing]
        assert cli.main(["gradcheck", "--draws", "3", "--out", str(tmp_path)]) == cli.EXIT_FAILURE
        experiment_cls.return_value.gradcheck.assert_called_once_with(3)
        captured = capsys.readouterr()
        assert "FAIL" in captured.out
        assert "gradient check failed" in captured.err

    @patch("perceptivenet.cli.Experiment")
    def test_gradcheck_success(self, experiment_cls, tmp_path, capsys):
        """Test a passing gradient check exits 0 with one line per tensor."""
        passing = GradCheckReport("mix_pool", [GradCheckResult("input", 1e-9, True, 32)])
        experiment_cls.return_value.gradcheck.return_value = [passing, passing]
        assert cli.main(["gradcheck", "--out", str(tmp_path)]) == cli.EXIT_OK
        assert len(capsys.readouterr().out.splitlines()) == 2

    def test_invalid_combination_exits_1(self, tmp_path):
        """Test a Log-Gabor first layer on ResUNet is a validation failure."""
        argv = ["train", "--variant", "resunet", "--first-layer", "loggabor", "--out", str(tmp_path)]
        assert cli.main(argv) == cli.EXIT_VALIDATION

    def test_missing_config_file_exits_1(self, tmp_path):
        """Test a missing run file is a validation failure."""
        assert cli.main(["train", "--config", str(tmp_path / "absent.cfg"), "--out", str(tmp_path)]) == cli.EXIT_VALIDATION

    def test_synth_end_to_end(self, tmp_path):
        """Test synth writes the dataset layout."""
        argv = ["synth", "--n-samples", "5", "--image-size", "16", "--out", str(tmp_path)]
        assert cli.main(argv) == cli.EXIT_OK
        assert len(list((tmp_path / "data" / "images").glob("*.png"))) == 5
        assert (tmp_path / "data" / "meta.txt").is_file()
