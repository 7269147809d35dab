"""
Seeded train/validation/test split.
"""

import math
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from ..constants import TEST_FRACTION, VAL_FRACTION
from ..exceptions import DatasetError
from ..utils.logging import get_logger
from .base import SegSample

logger = get_logger(__name__)

MIN_SPLIT_SAMPLES = 5


class DatasetSplits(NamedTuple):
    train: List[SegSample]
    val: List[SegSample]
    test: List[SegSample]


def split_sizes(n: int) -> Tuple[int, int, int]:
    """(train, val, test) sizes: test and val rounded to nearest, train takes the rest."""
    n_test = int(math.floor(TEST_FRACTION * n + 0.5))
    n_val = int(math.floor(VAL_FRACTION * n + 0.5))
    return n - n_test - n_val, n_val, n_test


def split(samples: Sequence[SegSample], seed: int = 0) -> DatasetSplits:
    """
    Shuffle and partition samples 64/16/20.

    Raises:
        DatasetError: With fewer than five samples
    """
    n = len(samples)
    if n < MIN_SPLIT_SAMPLES:
        logger.error(f"Cannot split {n} samples")
        raise DatasetError(f"Need at least {MIN_SPLIT_SAMPLES} samples to split, got {n}")
    n_train, n_val, _ = split_sizes(n)
    order = np.random.default_rng(seed).permutation(n)
    shuffled = [samples[i] for i in order]
    return DatasetSplits(
        train=shuffled[:n_train],
        val=shuffled[n_train:n_train + n_val],
        test=shuffled[n_train + n_val:],
    )
