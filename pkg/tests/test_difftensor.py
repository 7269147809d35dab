"""
Tests for the tensor and differentiation contract.
"""

import numpy as np
import pytest
import torch

from perceptivenet.difftensor import (
    CHECK_DTYPE,
    as_nchw,
    backward,
    check_finite,
    check_gradients,
    conv2d,
    conv_output_size,
    deterministic,
    grad_of,
    numerical_gradient,
    parameter_checksum,
    relative_error,
    zero_grads,
)
from perceptivenet.exceptions import GradientError, PerceptiveNetValidationError, ShapeMismatchError


class TestTensorNCHW:
    """Tests for rank-4 wrapping and finiteness."""

    def test_as_nchw(self):
        """Test numpy data is wrapped as a float64 rank-4 tensor."""
        tensor = as_nchw(np.zeros((2, 3, 4, 5)))
        assert tensor.shape == (2, 3, 4, 5)
        assert tensor.dtype == torch.float64
        assert tensor.numel() == 2 * 3 * 4 * 5

    def test_as_nchw_rejects_other_ranks(self):
        """Test a rank-3 input raises a shape error naming both shapes."""
        with pytest.raises(ShapeMismatchError) as info:
            as_nchw(np.zeros((3, 4, 5)))
        assert info.value.actual == (3, 4, 5)

    def test_check_finite(self):
        """Test NaN and Inf are contract violations."""
        ok = torch.ones(2)
        assert check_finite(ok, "test") is ok
        for bad in (float("nan"), float("inf")):
            with pytest.raises(GradientError, match="test"):
                check_finite(torch.tensor([1.0, bad]), "test")


class TestConv2d:
    """Tests for the convolution wrapper."""

    def test_output_size_formula(self):
        """Test the output extent formula."""
        assert conv_output_size(8, 3) == 6
        assert conv_output_size(8, 3, padding=1) == 8
        assert conv_output_size(8, 3, stride=2, padding=1) == 4
        assert conv_output_size(9, 3, dilation=2) == 5

    @pytest.mark.parametrize("stride,dilation,padding", [(1, 1, 0), (2, 1, 1), (1, 2, 2), (2, 3, 3)])
    def test_output_shape(self, torch_gen, stride, dilation, padding):
        """Test conv2d output shapes follow the formula."""
        x = torch.randn(2, 3, 11, 9, generator=torch_gen, dtype=CHECK_DTYPE)
        w = torch.randn(4, 3, 3, 3, generator=torch_gen, dtype=CHECK_DTYPE)
        out = conv2d(x, w, stride, dilation, padding)
        assert out.shape == (
            2, 4,
            conv_output_size(11, 3, stride, dilation, padding),
            conv_output_size(9, 3, stride, dilation, padding),
        )

    def test_cross_correlation(self):
        """Test conv2d is a cross-correlation, not a flipped convolution."""
        x = torch.arange(9, dtype=CHECK_DTYPE).reshape(1, 1, 3, 3)
        w = torch.zeros(1, 1, 3, 3, dtype=CHECK_DTYPE)
        w[0, 0, 0, 0] = 1.0
        assert conv2d(x, w).item() == 0.0

    def test_channel_mismatch(self):
        """Test a channel mismatch names both shapes."""
        with pytest.raises(ShapeMismatchError) as info:
            conv2d(torch.zeros(1, 3, 5, 5), torch.zeros(2, 4, 3, 3))
        assert info.value.expected == (2, 4, 3, 3)
        assert info.value.actual == (1, 3, 5, 5)

    def test_invalid_stride(self):
        """Test stride and dilation below 1 are rejected."""
        with pytest.raises(PerceptiveNetValidationError):
            conv2d(torch.zeros(1, 1, 5, 5), torch.zeros(1, 1, 3, 3), stride=0)


class TestBackward:
    """Tests for the backward contract."""

    def test_backward_populates_grads(self):
        """Test backward fills parameter gradients."""
        w = torch.tensor([1.0, 2.0], dtype=CHECK_DTYPE, requires_grad=True)
        backward((w ** 2).sum())
        assert torch.equal(w.grad, torch.tensor([2.0, 4.0], dtype=CHECK_DTYPE))

    def test_non_scalar_rejected(self):
        """Test backward on a non-scalar raises."""
        w = torch.ones(2, requires_grad=True)
        with pytest.raises(GradientError, match="scalar"):
            backward(w * 2)

    def test_second_backward_rejected(self):
        """Test a recording is single use."""
        w = torch.ones(2, requires_grad=True)
        loss = (w * 3).sum()
        backward(loss)
        with pytest.raises(GradientError, match="already"):
            backward(loss)

    def test_untracked_loss_rejected(self):
        """Test a loss without a recorded graph raises."""
        with pytest.raises(GradientError):
            backward(torch.tensor(1.0))

    def test_non_finite_loss_rejected(self):
        """Test a NaN loss raises before any gradient is written."""
        w = torch.ones(1, requires_grad=True)
        with pytest.raises(GradientError):
            backward((w * float("nan")).sum())
        assert w.grad is None

    def test_gradients_accumulate_until_zeroed(self):
        """Test gradients sum across passes and reset to explicit zeros."""
        w = torch.ones(3, requires_grad=True)
        backward(w.sum())
        backward(w.sum())
        assert torch.equal(w.grad, torch.full((3,), 2.0))
        zero_grads([w])
        assert torch.equal(w.grad, torch.zeros(3))

    def test_grad_of_defaults_to_zeros(self):
        """Test grad_of before any backward pass."""
        w = torch.ones(2, 2, requires_grad=True)
        assert torch.equal(grad_of(w), torch.zeros(2, 2))


class TestGradCheck:
    """Tests for finite differences and the relative error."""

    def test_relative_error_floor(self):
        """Test tiny entries are judged against the tensor scale."""
        numeric = np.array([1.0, 1e-12])
        analytic = np.array([1.0, 0.0])
        errors = relative_error(analytic, numeric)
        assert errors[0] == 0.0
        assert errors[1] == pytest.approx(1e-12 / 1e-3)

    def test_numerical_gradient_smooth(self):
        """Test central differences of a cubic."""
        x = torch.tensor([0.5, -1.0, 2.0], dtype=CHECK_DTYPE)
        numeric = numerical_gradient(lambda: (x ** 3).sum(), x)
        np.testing.assert_allclose(numeric, 3 * x.numpy() ** 2, rtol=1e-8)
        # the tensor is restored
        assert x.tolist() == [0.5, -1.0, 2.0]

    def test_numerical_gradient_refines_near_kinks(self):
        """Test an element within one step of a ReLU kink is re-measured with a smaller step."""
        x = torch.tensor([3e-6, 1.0], dtype=CHECK_DTYPE)
        numeric = numerical_gradient(lambda: torch.relu(x).sum(), x, step=1e-5)
        np.testing.assert_allclose(numeric, [1.0, 1.0], rtol=1e-8)

    def test_numerical_gradient_keeps_step_on_curvature(self):
        """Test a smooth, strongly curved function keeps the initial step."""
        x = torch.tensor([0.3, 0.7], dtype=CHECK_DTYPE)
        numeric = numerical_gradient(lambda: torch.sin(200.0 * x).sum(), x, step=1e-5)
        expected = []
        for value in (0.3, 0.7):
            plus = torch.sin(torch.tensor(200.0 * (value + 1e-5), dtype=CHECK_DTYPE))
            minus = torch.sin(torch.tensor(200.0 * (value - 1e-5), dtype=CHECK_DTYPE))
            expected.append(float(plus - minus) / 2e-5)
        np.testing.assert_allclose(numeric, expected, rtol=1e-9)
        np.testing.assert_allclose(numeric, 200.0 * np.cos(200.0 * x.numpy()), rtol=2e-6)

    def test_numerical_gradient_refines_twice_for_close_kinks(self):
        """Test a kink inside the first refined step is re-measured once more."""
        x = torch.tensor([3e-7], dtype=CHECK_DTYPE)
        numeric = numerical_gradient(lambda: torch.relu(x).sum(), x, step=1e-5)
        np.testing.assert_allclose(numeric, [1.0], rtol=1e-6)

    def test_numerical_gradient_min_step(self):
        """Test refinement never evaluates with a step below the minimum."""
        x = torch.tensor([3e-9], dtype=CHECK_DTYPE)
        calls = []

        def func():
            calls.append(float(x))
            return torch.relu(x).sum()

        numerical_gradient(func, x, step=1e-5, max_refinements=5, min_step=1e-7)
        # base, then a pair of evaluations at 1e-5, 1e-6 and 1e-7
        assert len(calls) == 7
        assert min(abs(c - 3e-9) for c in calls[1:]) >= 1e-7 * (1 - 1e-9)

    def test_check_gradients_zero_gradient(self, torch_gen):
        """Test a tensor with an exactly zero gradient is judged on absolute error."""
        w = torch.randn(3, generator=torch_gen, dtype=CHECK_DTYPE, requires_grad=True)
        b = torch.randn(4, generator=torch_gen, dtype=CHECK_DTYPE, requires_grad=True)
        report = check_gradients(lambda: (w ** 2).sum() + (b - b.mean()).sum(), {"w": w, "b": b})
        assert report.passed, report.results
        assert report.results[1].max_relative_error < 1e-7

    def test_check_gradients_passes(self, torch_gen):
        """Test a correct gradient passes."""
        x = torch.randn(4, generator=torch_gen, dtype=CHECK_DTYPE, requires_grad=True)
        report = check_gradients(lambda: (torch.sin(x) * x).sum(), {"x": x}, "sinx")
        assert report.passed
        assert report.max_relative_error < 1e-6
        assert report.to_records()[0]["check"] == "sinx"

    def test_check_gradients_detects_wrong_gradient(self):
        """Test a deliberately wrong backward fails the check."""

        class Doubled(torch.autograd.Function):
            @staticmethod
            def forward(ctx, x):
                return x ** 2

            @staticmethod
            def backward(ctx, grad):
                return grad * 0.0

        x = torch.ones(3, dtype=CHECK_DTYPE, requires_grad=True)
        report = check_gradients(lambda: Doubled.apply(x).sum(), {"x": x})
        assert not report.passed

    def test_check_gradients_requires_float64(self):
        """Test float32 tensors are refused."""
        x = torch.ones(2, requires_grad=True)
        with pytest.raises(PerceptiveNetValidationError, match="float64"):
            check_gradients(lambda: x.sum(), {"x": x})


class TestHelpers:
    """Tests for checksums and deterministic mode."""

    def test_parameter_checksum(self):
        """Test the checksum changes with any value."""
        a = torch.zeros(3)
        before = parameter_checksum([("a", a)])
        assert before == parameter_checksum([("a", a.clone())])
        a[1] = 1e-7
        assert before != parameter_checksum([("a", a)])

    def test_deterministic_restores_settings(self):
        """Test deterministic mode is scoped to the block."""
        threads = torch.get_num_threads()
        enabled = torch.are_deterministic_algorithms_enabled()
        with deterministic():
            assert torch.are_deterministic_algorithms_enabled()
            assert torch.get_num_threads() == 1
        assert torch.get_num_threads() == threads
        assert torch.are_deterministic_algorithms_enabled() == enabled
