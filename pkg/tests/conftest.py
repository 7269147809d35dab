"""
Pytest configuration for the PerceptiveNet tests.
"""

import numpy as np
import pytest
import torch

from perceptivenet.data import SynthSpec, generate_synthetic
from perceptivenet.models import ModelConfig


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="Run desk-scale training tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: desk-scale training runs (minutes); enabled with --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    """Fixture for a seeded numpy generator."""
    return np.random.default_rng(1234)


@pytest.fixture
def torch_gen():
    """Fixture for a seeded torch generator."""
    return torch.Generator().manual_seed(1234)


@pytest.fixture
def tiny_config():
    """
    Fixture for a small PerceptiveNet configuration.

    Two downsampling steps, so inputs must be multiples of 4.
    """
    return ModelConfig(
        base_channels=4,
        depth=2,
        n_classes=3,
        loggabor_kernel=5,
        dilation_rates=(1, 2),
    )


@pytest.fixture
def tiny_spec():
    """Fixture for a small synthetic dataset specification."""
    return SynthSpec(
        n_samples=10,
        image_size=16,
        n_classes=3,
        blob_count_min=1,
        blob_count_max=3,
        blob_radius_min=2.0,
        blob_radius_max=5.0,
    )


@pytest.fixture
def tiny_dataset(tiny_spec):
    """Fixture for ten 16x16 synthetic samples."""
    return generate_synthetic(tiny_spec, seed=7)
