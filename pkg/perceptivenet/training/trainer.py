"""
Training loop.

Per epoch: optional seeded shuffle, per-sample augmentation, mini-batches of
forward, cross-entropy, backward, Adam and parameter projection. Validation
runs at the configured cadence and on the final epoch; the weights with the
best validation mIoU are checkpointed and finally scored on the test split.
"""

import copy
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..data.augment import augment
from ..data.base import SegSample, stack_images, stack_masks
from ..data.split import DatasetSplits
from ..difftensor import backward, deterministic, zero_grads
from ..exceptions import ConfigError, DatasetError, DivergenceError
from ..models.checkpoint import apply_state, decode_state, encode_state, save_checkpoint
from ..models.segmodel import SegModel
from ..utils.logging import get_logger
from .config import TrainConfig
from .evaluate import EvalResult, evaluate
from .loss import cross_entropy_loss
from .optim import AdamState, adam_step

logger = get_logger(__name__)


@dataclass
class EpochRecord:
    """Metrics of one epoch; validation fields are NaN on epochs without validation."""

    epoch: int
    train_loss: float
    val_loss: float = math.nan
    val_pixel_acc: float = math.nan
    val_miou: float = math.nan

    @property
    def evaluated(self) -> bool:
        return not math.isnan(self.val_miou)


@dataclass
class TrainHistory:
    """
    Outcome of a training run.

    Attributes:
        variant: Model variant tag
        seed: Training seed
        records: One EpochRecord per completed epoch
        best_epoch: Epoch of the best validation mIoU
        best_val_miou: That mIoU, from the in-training weights
        best_checkpoint_miou: Validation mIoU of the weights restored from the checkpoint bytes
        test: Test-split metrics of the best weights, if a test split was given
        checkpoint_path: Where the best checkpoint was written
    """

    variant: str
    seed: int
    records: List[EpochRecord] = field(default_factory=list)
    best_epoch: Optional[int] = None
    best_val_miou: float = -math.inf
    best_checkpoint_miou: float = math.nan
    best_val: Optional[EvalResult] = None
    test: Optional[EvalResult] = None
    checkpoint_path: Optional[Path] = None

    @property
    def train_losses(self) -> List[float]:
        return [r.train_loss for r in self.records]


def _batch(samples: Sequence[SegSample], indices: np.ndarray, config: TrainConfig, epoch: int, start: int):
    chosen = []
    for offset, index in enumerate(indices):
        sample = samples[int(index)]
        if config.augment:
            sample = augment(sample, np.random.default_rng([config.seed, epoch, start + offset]))
        chosen.append(sample)
    return stack_images(chosen, config.torch_dtype), stack_masks(chosen)


def _snapshot(model: SegModel):
    """Checkpoint bytes of the model and a copy restored from exactly those bytes."""
    data = encode_state(model.state_dict())
    restored = copy.deepcopy(model)
    apply_state(restored, decode_state(data, "<snapshot>"), "<snapshot>")
    return data, restored.eval()


def batch_bounds(n: int, batch_size: int) -> List[Tuple[int, int]]:
    """
    (start, stop) of each mini-batch over ``n`` samples.

    A trailing batch of a single sample is folded into the one before it, since
    batch normalisation in training mode needs more than one value per channel.
    """
    bounds = [(start, min(start + batch_size, n)) for start in range(0, n, batch_size)]
    if len(bounds) > 1 and bounds[-1][1] - bounds[-1][0] == 1:
        bounds[-2:] = [(bounds[-2][0], n)]
    return bounds


def train_epoch(model: SegModel, samples: Sequence[SegSample], state: AdamState, config: TrainConfig, epoch: int, rng: np.random.Generator) -> float:
    """One pass over ``samples``; returns the sample-weighted mean training loss."""
    model.train()
    n = len(samples)
    order = rng.permutation(n) if config.shuffle else np.arange(n)
    total = 0.0
    for batch_index, (start, stop) in enumerate(batch_bounds(n, config.batch_size)):
        images, masks = _batch(samples, order[start:stop], config, epoch, start)
        zero_grads(model.parameters())
        loss = cross_entropy_loss(model(images), masks)
        value = float(loss.detach())
        if not math.isfinite(value):
            logger.error(f"Training diverged at epoch {epoch}, batch {batch_index}")
            raise DivergenceError(epoch, batch_index, value)
        backward(loss)
        adam_step(state)
        model.project_()
        total += value * len(masks)
        logger.debug(f"epoch {epoch} batch {batch_index} loss {value:.6f}")
    return total / n


def train(model: SegModel, splits: DatasetSplits, config: TrainConfig) -> TrainHistory:
    """
    Train ``model`` in place.

    Args:
        model: Freshly built model
        splits: (train, val, test) sample lists; train and val must be non-empty
        config: Training configuration

    Returns:
        TrainHistory

    Raises:
        DivergenceError: On a non-finite loss, naming the epoch and batch
        DatasetError: On an empty train or validation split
    """
    config.validate()
    train_set, val_set, test_set = splits
    if not train_set or not val_set:
        raise DatasetError("Training needs non-empty train and validation splits")
    _check_single_value_batches(model, train_set, config)

    with deterministic(config.deterministic):
        return _run(model, train_set, val_set, test_set, config)


def _check_single_value_batches(model: SegModel, train_set: Sequence[SegSample], config: TrainConfig) -> None:
    """Reject runs whose batches would hand batch normalisation a single value per channel."""
    divisor = getattr(getattr(model, "config", None), "divisor", None)
    if divisor is None:
        return
    h, w = train_set[0].image.shape[-2:]
    if (h // divisor) * (w // divisor) > 1:
        return
    if config.batch_size == 1 or len(train_set) == 1:
        logger.error(f"Batches of one {h}x{w} image reach a 1x1 bridge")
        raise ConfigError(
            f"{h}x{w} images shrink to 1x1 at the bridge, which needs at least 2 samples per batch",
            ["train.batch_size"],
        )


def _run(model, train_set, val_set, test_set, config: TrainConfig) -> TrainHistory:
    model.to(config.torch_dtype)
    state = AdamState.from_config(model.parameters(), config)
    rng = np.random.default_rng(config.seed)
    history = TrainHistory(variant=getattr(model, "variant", "custom"), seed=config.seed)
    best_model = None

    logger.info(
        f"Training {history.variant}: {len(train_set)} train / {len(val_set)} val samples, "
        f"{config.epochs} epochs, batch {config.batch_size}, lr {config.lr}"
    )
    for epoch in range(1, config.epochs + 1):
        record = EpochRecord(epoch, train_epoch(model, train_set, state, config, epoch, rng))
        if config.should_evaluate(epoch):
            val = evaluate(model, val_set, config.batch_size)
            record.val_loss, record.val_pixel_acc, record.val_miou = val.loss, val.pixel_acc, val.miou
            if val.miou > history.best_val_miou:
                _, best_model = _snapshot(model)
                restored_val = evaluate(best_model, val_set, config.batch_size)
                history.best_epoch = epoch
                history.best_val_miou = val.miou
                history.best_val = restored_val
                history.best_checkpoint_miou = restored_val.miou
                if config.checkpoint_path:
                    history.checkpoint_path = save_checkpoint(best_model, config.checkpoint_path)
            logger.info(
                f"epoch {epoch}/{config.epochs} train loss {record.train_loss:.4f} "
                f"val acc {val.pixel_acc:.4f} val mIoU {val.miou:.4f}"
            )
        else:
            logger.info(f"epoch {epoch}/{config.epochs} train loss {record.train_loss:.4f}")
        history.records.append(record)

    if test_set and best_model is not None:
        history.test = evaluate(best_model, test_set, config.batch_size)
        logger.info(f"test acc {history.test.pixel_acc:.4f} test mIoU {history.test.miou:.4f}")
    return history
