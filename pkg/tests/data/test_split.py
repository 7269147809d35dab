"""
Tests for the seeded dataset split.
"""

import numpy as np
import pytest

from perceptivenet.data import SegSample, split, split_sizes
from perceptivenet.exceptions import DatasetError


def numbered(n):
    return [SegSample(np.zeros((3, 2, 2), dtype=np.float32), np.zeros((2, 2), dtype=np.uint8), f"s{i}") for i in range(n)]


class TestSplit:
    """Tests for split and split_sizes."""

    def test_hundred_samples(self):
        """Test 100 samples split 64/16/20."""
        assert split_sizes(100) == (64, 16, 20)
        train, val, test = split(numbered(100), seed=0)
        assert (len(train), len(val), len(test)) == (64, 16, 20)

    def test_partition(self):
        """Test every sample lands in exactly one split."""
        parts = split(numbered(37), seed=2)
        stems = [s.stem for part in parts for s in part]
        assert sorted(stems) == sorted(f"s{i}" for i in range(37))

    def test_seeded(self):
        """Test equal seeds give equal splits and different seeds differ."""
        a = split(numbered(50), seed=1)
        b = split(numbered(50), seed=1)
        c = split(numbered(50), seed=2)
        assert [s.stem for s in a.test] == [s.stem for s in b.test]
        assert [s.stem for s in a.train] != [s.stem for s in c.train]

    def test_minimum_size(self):
        """Test five samples split and four are rejected."""
        train, val, test = split(numbered(5))
        assert (len(train), len(val), len(test)) == (3, 1, 1)
        with pytest.raises(DatasetError):
            split(numbered(4))
