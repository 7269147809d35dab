"""
Experiment orchestration.

An Experiment binds a RunConfig to an output directory and runs the
end-to-end workflows: synthetic data generation, training, ablations,
evaluation of checkpoints, filter dumps, class activation maps and the
gradient-check suite. Every workflow is deterministic given the config.
"""

import math
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np
import torch
from PIL import Image

from .config import RunConfig
from .constants import FirstLayers, Splits, Variants
from .data.base import SegSample
from .data.loader import load_dataset, mask_to_png, read_image, save_dataset
from .data.split import DatasetSplits, split
from .data.synthetic import generate_synthetic
from .difftensor import GradCheckReport, deterministic
from .exceptions import ConfigError
from .filterbank import Kernel2D, kernel_dc_component, peak_frequency
from .gradcheck import run_gradient_suite
from .metrics.cam import compute_cam, save_cam, to_uint8
from .models.checkpoint import load_checkpoint
from .models.segmodel import SegModel, build_model
from .reports import (
    EvalEntry,
    FilterReport,
    GradCheckFrame,
    HistoryReport,
    LossReport,
    MetricsReport,
    PerClassIoUReport,
)
from .training.evaluate import EvalResult, evaluate, predict_masks
from .training.trainer import TrainHistory, train
from .utils.logging import get_logger, level_from_env, setup_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]

CHECKPOINT_NAME = "checkpoint.pnet"
FILTER_SCALE = 8


class Experiment:
    """
    Entry point for running PerceptiveNet workflows.

    Attributes:
        config (RunConfig): Effective run configuration
        out_dir (Path): Root of every artifact the experiment writes
    """

    def __init__(
        self,
        config: Optional[RunConfig] = None,
        out_dir: PathLike = "out",
        log_level: Optional[str] = None,
        log_file: Optional[str] = None,
    ):
        """
        Initialize the experiment.

        Args:
            config: Run configuration (defaults when omitted)
            out_dir: Output directory
            log_level: Logging level name; falls back to PNET_LOG_LEVEL, then INFO
            log_file: Optional log file
        """
        setup_logger(level=(log_level or level_from_env()).upper(), log_file=log_file)
        self.config = config or RunConfig()
        self.out_dir = Path(out_dir)
        self._samples: Optional[List[SegSample]] = None
        logger.info(f"Experiment initialised: out={self.out_dir}, seed={self.seed}, config={self.config}")

    @property
    def seed(self) -> int:
        return self.config.seed

    # Data

    def synth(self, root: Optional[PathLike] = None) -> Path:
        """
        Generate the configured synthetic dataset and write it to disk.

        Args:
            root: Dataset directory; defaults to ``data.root``, then ``<out>/data``

        Returns:
            The dataset root
        """
        spec = self.config.synth_spec()
        root = Path(root or self.config.data_root or self.out_dir / "data")
        samples = generate_synthetic(spec, self.seed)
        meta = {"seed": self.seed, **spec.to_dict()}
        return save_dataset(samples, root, meta)

    def dataset(self) -> List[SegSample]:
        """Samples from ``data.root`` when set, otherwise the synthetic set generated in memory."""
        if self._samples is None:
            n_classes = self.config["model.n_classes"]
            root = self.config.data_root
            if root is not None:
                self._samples = load_dataset(root, n_classes)
            else:
                logger.info("No data.root configured, generating the synthetic dataset in memory")
                self._samples = generate_synthetic(self.config.synth_spec(), self.seed)
        return self._samples

    def splits(self) -> DatasetSplits:
        return split(self.dataset(), self.seed)

    # Training

    def run_dir(self, variant: str, first_layer: Optional[str] = None) -> Path:
        name = variant if first_layer is None else f"{variant}-{first_layer}"
        return self.out_dir / name

    def train(self, variant: Optional[str] = None, first_layer: Optional[str] = None) -> TrainHistory:
        """
        Train one variant and write its checkpoint and reports.

        Writes ``<out>/<variant>/checkpoint.pnet`` (plus sidecar), ``metrics.csv``,
        ``loss.csv`` and ``per_class_iou.csv``.

        Args:
            variant: Overrides ``model.variant``
            first_layer: Overrides ``model.first_layer``

        Returns:
            TrainHistory of the run
        """
        model_config = self.config.model_config(variant, first_layer)
        run_dir = self.run_dir(model_config.variant, first_layer)
        train_config = self.config.train_config(run_dir / CHECKPOINT_NAME)
        model = build_model(model_config, self.seed)
        logger.info(f"Training {model_config.variant} ({model.n_parameters()} parameters) into {run_dir}")

        history = train(model, self.splits(), train_config)
        if first_layer is not None:
            history.variant = f"{model_config.variant}+{first_layer}"
        self._write_history(history, run_dir)
        return history

    def _write_history(self, history: TrainHistory, run_dir: Path) -> None:
        HistoryReport.write_csv(history, run_dir / "metrics.csv")
        LossReport.write_csv(history, run_dir / "loss.csv")
        entries = []
        if history.best_val is not None:
            entries.append(EvalEntry(history.variant, history.seed, history.best_epoch, Splits.VAL, history.best_val))
        if history.test is not None:
            entries.append(EvalEntry(history.variant, history.seed, history.best_epoch, Splits.TEST, history.test))
        PerClassIoUReport.write_csv(entries, run_dir / "per_class_iou.csv")

    def ablate(self, variants: Sequence[str] = Variants.ALL) -> List[TrainHistory]:
        """
        Train each variant in turn under identical data, seed and recipe.

        Returns:
            One TrainHistory per variant; ``<out>/ablation.csv`` holds one
            block of rows per variant
        """
        histories = [self.train(variant) for variant in variants]
        HistoryReport.write_csv(histories, self.out_dir / "ablation.csv")
        self._log_summary(histories)
        return histories

    def ablate_first_layer(self, kinds: Sequence[str] = FirstLayers.ALL) -> List[TrainHistory]:
        """Train the configured mix-pool variant once per first-layer kind; writes ``first_layer_ablation.csv``."""
        variant = self.config["model.variant"]
        histories = [self.train(variant, kind) for kind in kinds]
        HistoryReport.write_csv(histories, self.out_dir / "first_layer_ablation.csv")
        self._log_summary(histories)
        return histories

    @staticmethod
    def _log_summary(histories: Iterable[TrainHistory]) -> None:
        for history in histories:
            test = history.test.miou if history.test is not None else math.nan
            logger.info(
                f"{history.variant}: best val mIoU {history.best_checkpoint_miou:.4f} "
                f"(epoch {history.best_epoch}), test mIoU {test:.4f}"
            )

    # Checkpoint workflows

    def load(self, checkpoint: PathLike) -> SegModel:
        return load_checkpoint(checkpoint, self.config.train_config().torch_dtype)

    def evaluate(self, checkpoint: PathLike, split_name: str = Splits.TEST, out_dir: Optional[PathLike] = None) -> EvalResult:
        """
        Score a checkpoint on one split of the configured dataset.

        Writes ``metrics.csv``, ``per_class_iou.csv`` and one predicted class-ID
        PNG per sample under ``predictions/``.

        Args:
            checkpoint: Checkpoint file with its ``.json`` sidecar
            split_name: "train", "val" or "test"
            out_dir: Destination; defaults to the output directory

        Returns:
            EvalResult
        """
        if split_name not in (Splits.TRAIN, Splits.VAL, Splits.TEST):
            raise ConfigError(f"Unknown split {split_name!r}", ["split"])
        model = self.load(checkpoint)
        samples = getattr(self.splits(), split_name)
        batch_size = self.config["train.batch_size"]
        with deterministic():
            result = evaluate(model, samples, batch_size, n_classes=model.config.n_classes)
            predictions = predict_masks(model, samples, batch_size)

        out_dir = Path(out_dir or self.out_dir)
        entry = EvalEntry(model.variant, self.seed, None, split_name, result)
        MetricsReport.write_csv([entry], out_dir / "metrics.csv")
        PerClassIoUReport.write_csv([entry], out_dir / "per_class_iou.csv")
        pred_dir = out_dir / "predictions"
        pred_dir.mkdir(parents=True, exist_ok=True)
        for sample, mask in zip(samples, predictions):
            mask_to_png(mask).save(pred_dir / f"{sample.stem}.png")
        logger.info(f"{split_name} pixel accuracy {result.pixel_acc:.4f}, mIoU {result.miou:.4f} ({result.n_samples} samples)")
        return result

    def filters(self, checkpoint: Optional[PathLike] = None, out_dir: Optional[PathLike] = None) -> Path:
        """
        Dump the first-layer kernels of a checkpoint, or of a fresh model built from the seed.

        Writes one upscaled PNG per (out, in) kernel, ``grid.png`` with every
        kernel tiled behind a one-pixel border, and ``filters.csv`` with each
        kernel's DC response and peak radial frequency.

        Returns:
            The output directory
        """
        model = self.load(checkpoint) if checkpoint else build_model(self.config.model_config(), self.seed)
        kernels = model.first_layer_kernels().double().cpu().numpy()
        out_dir = Path(out_dir or self.out_dir / "filters")
        out_dir.mkdir(parents=True, exist_ok=True)

        rows, tiles = [], []
        n_out, n_in = kernels.shape[:2]
        for o in range(n_out):
            for i in range(n_in):
                values = kernels[o, i]
                name = f"filter_{o:03d}_{i}"
                tile = kernel_to_image(values)
                tiles.append(tile)
                Image.fromarray(tile).resize(
                    (tile.shape[1] * FILTER_SCALE, tile.shape[0] * FILTER_SCALE), Image.Resampling.NEAREST
                ).save(out_dir / f"{name}.png")
                kernel = Kernel2D(values.shape[0], values)
                rows.append({
                    "filter": name,
                    "out_channel": o,
                    "in_channel": i,
                    "dc": kernel_dc_component(kernel),
                    "peak_frequency": peak_frequency(kernel),
                })

        Image.fromarray(tile_grid(tiles, columns=n_in)).resize(
            ((n_in * (kernels.shape[-1] + 1) + 1) * FILTER_SCALE, (n_out * (kernels.shape[-2] + 1) + 1) * FILTER_SCALE),
            Image.Resampling.NEAREST,
        ).save(out_dir / "grid.png")
        FilterReport.write_csv(rows, out_dir / "filters.csv")
        logger.info(f"Wrote {len(tiles)} filters of {model.variant} to {out_dir}")
        return out_dir

    def cam(self, checkpoint: PathLike, image_path: PathLike, class_id: int, out_dir: Optional[PathLike] = None) -> Path:
        """
        Class activation map of one image.

        Returns:
            Path of ``<stem>_overlay.png``; ``<stem>_cam.png`` is written beside it
        """
        model = self.load(checkpoint)
        image = read_image(image_path)
        heatmap = compute_cam(model, torch.from_numpy(image)[None], class_id)
        return save_cam(heatmap, image, Path(out_dir or self.out_dir), Path(image_path).stem)

    def gradcheck(self, n_draws: int = 50) -> List[GradCheckReport]:
        """Run the gradient suite and write ``gradcheck.csv``."""
        reports = run_gradient_suite(self.seed, n_draws)
        GradCheckFrame.write_csv(reports, self.out_dir / "gradcheck.csv")
        return reports


def kernel_to_image(values: np.ndarray) -> np.ndarray:
    """Min-max scale a kernel to uint8; constant kernels become mid-grey."""
    low, high = float(values.min()), float(values.max())
    if high <= low:
        return np.full(values.shape, 128, dtype=np.uint8)
    return to_uint8((values - low) / (high - low))


def tile_grid(tiles: Sequence[np.ndarray], columns: int) -> np.ndarray:
    """Tile equally sized uint8 images row-major with a one-pixel black border around each."""
    h, w = tiles[0].shape
    n_rows = -(-len(tiles) // columns)
    grid = np.zeros((n_rows * (h + 1) + 1, columns * (w + 1) + 1), dtype=np.uint8)
    for index, tile in enumerate(tiles):
        r, c = divmod(index, columns)
        top, left = 1 + r * (h + 1), 1 + c * (w + 1)
        grid[top:top + h, left:left + w] = tile
    return grid
