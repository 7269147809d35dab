"""
Command-line interface.

    perceptivenet synth     --config run.cfg --out data/
    perceptivenet train     --config run.cfg --variant resunet
    perceptivenet ablate    --config run.cfg
    perceptivenet eval      --checkpoint out/perceptivenet/checkpoint.pnet --split test
    perceptivenet filters   --checkpoint out/perceptivenet/checkpoint.pnet
    perceptivenet cam       --checkpoint ... --image img.png --class-id 1
    perceptivenet gradcheck

Exit codes: 0 success, 1 validation error, 2 runtime failure (including a
failed gradient check).
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from . import __version__
from .config import RunConfig
from .constants import FirstLayers, Splits, Variants
from .exceptions import PerceptiveNetValidationError
from .experiment import Experiment
from .utils.logging import get_logger

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_FAILURE = 2

# argparse dest -> run-config key
FLAG_KEYS = {
    "seed": "train.seed",
    "variant": "model.variant",
    "first_layer": "model.first_layer",
    "base_channels": "model.base_channels",
    "depth": "model.depth",
    "n_classes": "model.n_classes",
    "kernel_size": "loggabor.kernel_size",
    "alpha": "mixpool.alpha",
    "rates": "dilated.rates",
    "epochs": "train.epochs",
    "batch_size": "train.batch_size",
    "lr": "train.lr",
    "eval_every": "train.eval_every",
    "dtype": "train.dtype",
    "augment": "train.augment",
    "data_root": "data.root",
    "n_samples": "data.synth.n_samples",
    "image_size": "data.synth.image_size",
    "noise": "data.synth.noise",
    "shadow_probability": "data.synth.shadow_probability",
    "overlap": "data.synth.overlap",
}


class UsageParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with the validation code."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _common_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group("common")
    group.add_argument("--config", type=Path, help="Run configuration file (dotted key=value lines)")
    group.add_argument("--seed", type=int, help="Seed of data generation, splitting, initialisation and training")
    group.add_argument("--out", type=Path, default=Path("out"), help="Output directory (default: out)")
    group.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR (default: $PNET_LOG_LEVEL or INFO)")
    group.add_argument("--log-file", help="Also write the log to this file")
    return parser


def _model_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group("model")
    group.add_argument("--variant", choices=Variants.ALL, help="Network variant")
    group.add_argument("--first-layer", choices=FirstLayers.ALL, help="Stem first layer (default: the variant's own)")
    group.add_argument("--base-channels", type=int, help="Stem width")
    group.add_argument("--depth", type=int, help="Downsampling steps")
    group.add_argument("--n-classes", type=int, help="Classes including background")
    group.add_argument("--kernel-size", type=int, help="Odd side of the Gabor/Log-Gabor kernels")
    group.add_argument("--alpha", type=float, help="Mix-pool mixing portion in [0, 1]")
    group.add_argument("--rates", help="Comma-separated dilation rates, e.g. 1,3,6,9")
    group.add_argument("--data-root", help="Dataset directory (images/ and masks/); synthetic data in memory when unset")
    return parser


def _train_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group("training")
    group.add_argument("--epochs", type=int, help="Training epochs")
    group.add_argument("--batch-size", type=int, help="Samples per step")
    group.add_argument("--lr", type=float, help="Adam learning rate")
    group.add_argument("--eval-every", type=int, help="Validation cadence in epochs")
    group.add_argument("--dtype", choices=("float32", "float64"), help="Training precision")
    group.add_argument("--no-augment", dest="augment", action="store_const", const=False, help="Disable augmentation")
    return parser


def build_parser() -> argparse.ArgumentParser:
    common, model, training = _common_parser(), _model_parser(), _train_parser()
    parser = UsageParser(prog="perceptivenet", description="PerceptiveNet segmentation experiments")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("synth", parents=[common], help="Generate the synthetic dataset")
    group = synth.add_argument_group("synthetic data")
    group.add_argument("--data-root", help="Dataset directory (default: data.root, then <out>/data)")
    group.add_argument("--n-samples", type=int, help="Number of images")
    group.add_argument("--image-size", type=int, help="Side of the square images")
    group.add_argument("--n-classes", type=int, help="Classes including background")
    group.add_argument("--noise", type=float, help="Gaussian pixel noise")
    group.add_argument("--shadow-probability", type=float, help="Chance of a shadow band per image")
    group.add_argument("--no-overlap", dest="overlap", action="store_const", const=False, help="Keep crowns apart")

    train = commands.add_parser("train", parents=[common, model, training], help="Train a variant")
    train.add_argument("--ablate", action="store_true", help="Train all four variants in sequence")
    train.add_argument("--ablate-first-layer", action="store_true", help="Train the variant once per first-layer kind")

    commands.add_parser("ablate", parents=[common, model, training], help="Alias for train --ablate")

    evaluate = commands.add_parser("eval", parents=[common, model, training], help="Evaluate a checkpoint")
    evaluate.add_argument("--checkpoint", type=Path, required=True, help="Checkpoint file")
    evaluate.add_argument("--split", choices=(Splits.TRAIN, Splits.VAL, Splits.TEST), default=Splits.TEST,
                          help="Split to score (default: test)")

    filters = commands.add_parser("filters", parents=[common, model], help="Dump first-layer kernels as PNGs")
    filters.add_argument("--checkpoint", type=Path, help="Checkpoint file (default: a fresh model from --seed)")

    cam = commands.add_parser("cam", parents=[common], help="Class activation map overlay")
    cam.add_argument("--checkpoint", type=Path, required=True, help="Checkpoint file")
    cam.add_argument("--image", type=Path, required=True, help="Input image")
    cam.add_argument("--class-id", type=int, required=True, help="Class to explain")
    cam.add_argument("--dtype", choices=("float32", "float64"), help="Precision of the rebuilt model")

    gradcheck = commands.add_parser("gradcheck", parents=[common], help="Finite-difference gradient suite")
    gradcheck.add_argument("--draws", type=int, default=50, help="Random Log-Gabor parameter draws (default: 50)")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the ``--config`` file, then flags."""
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    overrides: Dict[str, Any] = {}
    for dest, key in FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides[key] = value if isinstance(value, (bool, int, float)) else str(value)
    return config.merge(overrides)


def run(args: argparse.Namespace) -> int:
    experiment = Experiment(resolve_config(args), args.out, args.log_level, args.log_file)
    command = args.command
    logger.info(f"Running {command}")

    if command == "synth":
        experiment.synth()
    elif command == "ablate" or (command == "train" and args.ablate):
        experiment.ablate()
    elif command == "train" and args.ablate_first_layer:
        experiment.ablate_first_layer()
    elif command == "train":
        experiment.train()
    elif command == "eval":
        experiment.evaluate(args.checkpoint, args.split)
    elif command == "filters":
        experiment.filters(args.checkpoint)
    elif command == "cam":
        experiment.cam(args.checkpoint, args.image, args.class_id)
    elif command == "gradcheck":
        reports = experiment.gradcheck(args.draws)
        for report in reports:
            for result in report.results:
                status = "ok" if result.passed else "FAIL"
                print(f"{report.label:20s} {result.name:20s} {result.max_relative_error:.3e} {status}")
        if not all(report.passed for report in reports):
            print("gradient check failed", file=sys.stderr)
            return EXIT_FAILURE

    logger.info(f"Finished {command}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except PerceptiveNetValidationError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
