"""
Training configuration.
"""

from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from ..constants import ADAM_BETAS, ADAM_EPS, DEFAULT_BATCH_SIZE, DEFAULT_EPOCHS, DEFAULT_LR
from ..difftensor import DTYPES
from ..exceptions import ConfigError
from ..utils.logging import get_logger

logger = get_logger(__name__)


@dataclass
class TrainConfig:
    """
    Attributes:
        epochs: Passes over the training split
        batch_size: Samples per step
        lr: Adam learning rate; 0 keeps every parameter fixed
        betas: Adam moment decay rates
        eps: Adam denominator offset
        seed: Seed of the shuffle and augmentation streams
        checkpoint_path: Where the best-validation-mIoU checkpoint is written
        eval_every: Validation cadence in epochs; the last epoch is always evaluated
        augment: Apply rotation/flip augmentation to training samples
        shuffle: Reshuffle the training split every epoch
        dtype: "float32" or "float64"
        deterministic: Single-threaded deterministic kernels while training
    """

    epochs: int = DEFAULT_EPOCHS
    batch_size: int = DEFAULT_BATCH_SIZE
    lr: float = DEFAULT_LR
    betas: Tuple[float, float] = ADAM_BETAS
    eps: float = ADAM_EPS
    seed: int = 0
    checkpoint_path: Optional[Path] = None
    eval_every: int = 1
    augment: bool = True
    shuffle: bool = True
    dtype: str = "float32"
    deterministic: bool = True

    def validate(self) -> "TrainConfig":
        """
        Raises:
            ConfigError: Listing each offending field
        """
        problems = []
        if not isinstance(self.epochs, int) or self.epochs < 1:
            problems.append("epochs")
        if not isinstance(self.batch_size, int) or self.batch_size < 1:
            problems.append("batch_size")
        if not (self.lr >= 0.0):
            problems.append("lr")
        if len(self.betas) != 2 or not all(0.0 <= b < 1.0 for b in self.betas):
            problems.append("betas")
        if not (self.eps > 0.0):
            problems.append("eps")
        if not isinstance(self.eval_every, int) or self.eval_every < 1:
            problems.append("eval_every")
        if self.dtype not in DTYPES:
            problems.append("dtype")
        if problems:
            logger.error(f"Invalid train config fields: {problems}")
            raise ConfigError("Invalid train config", problems)
        return self

    @property
    def torch_dtype(self):
        return DTYPES[self.dtype]

    def should_evaluate(self, epoch: int) -> bool:
        return epoch % self.eval_every == 0 or epoch == self.epochs

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["checkpoint_path"] = str(self.checkpoint_path) if self.checkpoint_path else None
        data["betas"] = list(self.betas)
        return data
