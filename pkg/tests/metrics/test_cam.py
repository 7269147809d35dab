"""
Tests for class activation maps.
"""

import numpy as np
import pytest
import torch

from perceptivenet.exceptions import MetricsError
from perceptivenet.metrics import colourise, compute_cam, overlay, save_cam
from perceptivenet.models import build_model


@pytest.fixture
def model(tiny_config):
    """Fixture for a freshly built tiny PerceptiveNet."""
    return build_model(tiny_config, seed=0)


class TestComputeCam:
    """Tests for compute_cam."""

    def test_dims_and_range(self, model, torch_gen):
        """Test the heatmap matches the image dims and lies in [0, 1]."""
        heatmap = compute_cam(model, torch.rand(3, 16, 20, generator=torch_gen), class_id=1)
        assert heatmap.shape == (16, 20)
        assert heatmap.min() >= 0.0 and heatmap.max() <= 1.0

    def test_batched_input(self, model, torch_gen):
        """Test a (1, 3, H, W) image gives the same map as (3, H, W)."""
        image = torch.rand(3, 16, 16, generator=torch_gen)
        assert np.array_equal(compute_cam(model, image, 2), compute_cam(model, image[None], 2))

    @pytest.mark.parametrize("class_id", [-1, 3])
    def test_class_out_of_range(self, model, class_id):
        """Test classes outside [0, n_classes) raise."""
        with pytest.raises(MetricsError):
            compute_cam(model, torch.zeros(3, 16, 16), class_id)

    def test_zero_head_gives_zero_map(self, model):
        """Test a constant class activation normalises to zeros."""
        with torch.no_grad():
            model.head.weight.zero_()
        heatmap = compute_cam(model, torch.rand(3, 16, 16), 0)
        assert np.array_equal(heatmap, np.zeros((16, 16)))

    def test_training_mode_restored(self, model):
        """Test the model's mode is left as it was."""
        model.train()
        compute_cam(model, torch.rand(3, 16, 16), 0)
        assert model.training


class TestOverlay:
    """Tests for colourise, overlay and save_cam."""

    def test_colourise_shape(self):
        """Test heatmaps become RGB."""
        assert colourise(np.linspace(0, 1, 12).reshape(3, 4)).shape == (3, 4, 3)

    def test_zero_heatmap_keeps_image(self, rng):
        """Test the overlay equals the image where the heatmap is zero."""
        image = rng.random((3, 6, 6))
        heatmap = np.zeros((6, 6))
        heatmap[2:4, 2:4] = 0.7
        blended = overlay(image, heatmap)
        base = image.transpose(1, 2, 0)
        assert np.array_equal(blended[0, 0], base[0, 0])
        assert not np.array_equal(blended[2, 2], base[2, 2])

    def test_dims_must_match(self):
        """Test mismatched image and heatmap dims raise."""
        with pytest.raises(MetricsError):
            overlay(np.zeros((3, 4, 4)), np.zeros((4, 5)))

    def test_save_cam_files(self, rng, tmp_path):
        """Test the grayscale map and RGB overlay are written."""
        path = save_cam(rng.random((8, 8)), rng.random((3, 8, 8)), tmp_path, "tile")
        assert path == tmp_path / "tile_overlay.png"
        assert (tmp_path / "tile_cam.png").is_file()
        assert path.is_file()
