"""
Tests for the residual units.
"""

import pytest
import torch

from perceptivenet.constants import FirstLayers
from perceptivenet.exceptions import ConfigError, ShapeMismatchError
from perceptivenet.gradcheck import check_decoder_block, check_encoder_block
from perceptivenet.layers import (
    AveragedDilatedConv2d,
    DecoderResBlock,
    EncoderResBlock,
    GaborConv2d,
    LogGaborConv2d,
    MixPool2d,
    StemBlock,
    first_layer,
)
from perceptivenet.layers.blocks import DOWNSAMPLE_STRIDE


class TestFirstLayer:
    """Tests for the first-layer switch."""

    @pytest.mark.parametrize("kind, expected", [
        (FirstLayers.CONV, torch.nn.Conv2d),
        (FirstLayers.GABOR, GaborConv2d),
        (FirstLayers.LOGGABOR, LogGaborConv2d),
    ])
    def test_kinds(self, kind, expected):
        """Test each kind builds its layer."""
        assert isinstance(first_layer(kind, 3, 8, kernel_size=5), expected)

    def test_unknown_kind(self):
        """Test unknown kinds raise ConfigError naming the field."""
        with pytest.raises(ConfigError) as exc_info:
            first_layer("sobel", 3, 8)
        assert exc_info.value.fields == ["model.first_layer"]


class TestStemBlock:
    """Tests for StemBlock."""

    def test_full_resolution(self, torch_gen):
        """Test the stem keeps the spatial dims and widens to its output channels."""
        stem = StemBlock(3, 8, FirstLayers.LOGGABOR, kernel_size=5)
        out = stem(torch.randn(2, 3, 12, 12, generator=torch_gen))
        assert tuple(out.shape) == (2, 8, 12, 12)
        assert isinstance(stem.first, LogGaborConv2d)

    def test_wrong_channels(self):
        """Test a grey image is rejected by an RGB stem."""
        with pytest.raises(ShapeMismatchError):
            StemBlock(3, 8)(torch.zeros(1, 1, 8, 8))


class TestEncoderResBlock:
    """Tests for EncoderResBlock."""

    @pytest.mark.parametrize("downsample", ["mixpool", "stride"])
    def test_halves_spatial_dims(self, downsample, torch_gen):
        """Test both downsampling modes halve the spatial dims and set the width."""
        block = EncoderResBlock(4, 8, downsample)
        out = block(torch.randn(2, 4, 16, 12, generator=torch_gen))
        assert tuple(out.shape) == (2, 8, 8, 6)

    def test_mixpool_in_branch_and_shortcut(self):
        """Test the mix-pool unit downsamples both paths."""
        block = EncoderResBlock(4, 8, "mixpool", mix_alpha=0.6)
        assert any(isinstance(m, MixPool2d) for m in block.branch)
        assert isinstance(block.shortcut[-1], MixPool2d)
        assert block.shortcut[-1].spec.alpha == 0.6

    def test_stride_has_no_mixpool(self):
        """Test strided units carry no pooling."""
        block = EncoderResBlock(4, 8, DOWNSAMPLE_STRIDE)
        assert not any(isinstance(m, MixPool2d) for m in block.modules())
        assert block.shortcut[0].stride == (2, 2)

    def test_dilated_unit_optional(self):
        """Test the averaged dilated unit is appended only when rates are given."""
        assert not EncoderResBlock(4, 8).has_dilated
        block = EncoderResBlock(4, 8, dilation_rates=(1, 2, 3))
        assert block.has_dilated
        assert isinstance(block.branch[-1], AveragedDilatedConv2d)

    def test_odd_dims_raise(self):
        """Test odd spatial dims are rejected before pooling."""
        with pytest.raises(ShapeMismatchError) as exc_info:
            EncoderResBlock(4, 8)(torch.zeros(1, 4, 9, 8))
        assert exc_info.value.expected == (None, None, 10, 8)

    def test_unknown_downsampling(self):
        """Test unknown downsampling modes raise ConfigError."""
        with pytest.raises(ConfigError):
            EncoderResBlock(4, 8, "unpool")

    def test_gradients_match_finite_differences(self):
        """Test the dilated mix-pool unit against finite differences."""
        report = check_encoder_block(seed=4)
        assert report.passed, report.results


class TestDecoderResBlock:
    """Tests for DecoderResBlock."""

    def test_upsamples_and_concatenates(self, torch_gen):
        """Test the output has the skip's resolution and the block's width."""
        block = DecoderResBlock(8, 4, 4, dilation_rates=(1, 2))
        x = torch.randn(2, 8, 4, 4, generator=torch_gen)
        skip = torch.randn(2, 4, 8, 8, generator=torch_gen)
        assert tuple(block.concat(x, skip).shape) == (2, 12, 8, 8)
        assert tuple(block(x, skip).shape) == (2, 4, 8, 8)

    def test_concat_order(self):
        """Test the upsampled input comes first, then the skip."""
        block = DecoderResBlock(1, 1, 1)
        x = torch.ones(1, 1, 2, 2)
        skip = torch.zeros(1, 1, 4, 4)
        stacked = block.concat(x, skip)
        assert torch.equal(stacked[:, 0], torch.ones(1, 4, 4))
        assert torch.equal(stacked[:, 1], torch.zeros(1, 4, 4))

    def test_skip_mismatch_raises(self):
        """Test a skip that is not twice the input's size is rejected with both shapes."""
        block = DecoderResBlock(8, 4, 4)
        with pytest.raises(ShapeMismatchError) as exc_info:
            block(torch.zeros(1, 8, 4, 4), torch.zeros(1, 4, 6, 6))
        assert exc_info.value.expected == (1, 4, 8, 8)
        assert exc_info.value.actual == (1, 4, 6, 6)

    def test_gradients_match_finite_differences(self):
        """Test the dilated decoder unit against finite differences."""
        report = check_decoder_block(seed=5)
        assert report.passed, report.results
