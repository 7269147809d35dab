"""
Dense NCHW tensors with a reverse-mode differentiation contract.

Storage, convolution and the gradient tape are delegated to torch; this module
adds the checks the rest of the package relies on: shape validation with both
shapes named, finiteness after every operation, scalar-only single-use
backward, explicit gradient reset, and a central finite-difference checker.
"""

import hashlib
import weakref
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np
import torch
import torch.nn.functional as F

from .constants import (
    GRADCHECK_CURVATURE_BAND,
    GRADCHECK_KINK_RATIO,
    GRADCHECK_MAX_REFINEMENTS,
    GRADCHECK_MIN_STEP,
    GRADCHECK_STEP,
    GRADCHECK_TOLERANCE,
)
from .exceptions import GradientError, PerceptiveNetValidationError, ShapeMismatchError
from .utils.logging import get_logger

logger = get_logger(__name__)

CHECK_DTYPE = torch.float64
TRAIN_DTYPE = torch.float32

DTYPES = {
    "float32": torch.float32,
    "float64": torch.float64,
}

# Loss tensors whose graph has already been consumed by ``backward``.
_consumed = weakref.WeakSet()


def as_nchw(data, dtype: torch.dtype = CHECK_DTYPE) -> torch.Tensor:
    """
    Wrap array-like data as a rank-4 tensor.

    Args:
        data: numpy array, nested sequence or tensor with four dimensions
        dtype: Floating dtype of the result

    Returns:
        Tensor of shape (n, c, h, w)

    Raises:
        ShapeMismatchError: If the data is not rank 4
    """
    tensor = torch.as_tensor(np.asarray(data) if not torch.is_tensor(data) else data, dtype=dtype)
    if tensor.dim() != 4:
        raise ShapeMismatchError("TensorNCHW must be rank 4", ("n", "c", "h", "w"), tuple(tensor.shape))
    return tensor


def check_finite(tensor: torch.Tensor, where: str) -> torch.Tensor:
    """
    Assert that every value of ``tensor`` is finite.

    Args:
        tensor: Tensor to inspect
        where: Description of the producing operation

    Returns:
        The tensor, unchanged

    Raises:
        GradientError: If any value is NaN or infinite
    """
    if not bool(torch.isfinite(tensor).all()):
        logger.error(f"Non-finite values produced by {where}")
        raise GradientError(f"Non-finite values produced by {where}")
    return tensor


def conv_output_size(size: int, kernel: int, stride: int = 1, dilation: int = 1, padding: int = 0) -> int:
    """Spatial extent of a convolution output along one axis."""
    return (size + 2 * padding - dilation * (kernel - 1) - 1) // stride + 1


def conv2d(
    input: torch.Tensor,
    weights: torch.Tensor,
    stride: int = 1,
    dilation: int = 1,
    padding: int = 0,
    bias: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """
    Two-dimensional cross-correlation.

    Args:
        input: (n, c, h, w) tensor
        weights: (o, c, kh, kw) tensor
        stride: Step between output taps (>= 1)
        dilation: Spacing between kernel taps (>= 1)
        padding: Zero padding on every side
        bias: Optional (o,) bias

    Returns:
        (n, o, h', w') tensor with h' = floor((h + 2p - d(kh - 1) - 1) / s) + 1

    Raises:
        ShapeMismatchError: If the channel extents disagree
        PerceptiveNetValidationError: If stride or dilation is below 1
    """
    if input.dim() != 4 or weights.dim() != 4:
        raise ShapeMismatchError("conv2d expects rank-4 input and weights", tuple(weights.shape), tuple(input.shape))
    if input.shape[1] != weights.shape[1]:
        logger.error(f"conv2d channel mismatch: input {tuple(input.shape)} vs weights {tuple(weights.shape)}")
        raise ShapeMismatchError(
            f"conv2d input {tuple(input.shape)} does not match weights {tuple(weights.shape)}",
            tuple(weights.shape),
            tuple(input.shape),
        )
    if stride < 1 or dilation < 1:
        raise PerceptiveNetValidationError(f"stride and dilation must be >= 1, got {stride} and {dilation}")
    kh, kw = weights.shape[2], weights.shape[3]
    out_h = conv_output_size(input.shape[2], kh, stride, dilation, padding)
    out_w = conv_output_size(input.shape[3], kw, stride, dilation, padding)
    if out_h < 1 or out_w < 1:
        raise ShapeMismatchError("conv2d kernel larger than padded input", tuple(weights.shape), tuple(input.shape))
    return F.conv2d(input, weights, bias, stride=stride, padding=padding, dilation=dilation)


def backward(loss: torch.Tensor) -> None:
    """
    Populate ``.grad`` of every parameter reachable from ``loss``.

    Args:
        loss: Scalar produced by a recorded forward computation

    Raises:
        GradientError: On a non-scalar loss, a second backward over the same
            recording, a loss without a recorded graph, or non-finite values
    """
    if loss.numel() != 1:
        raise GradientError(f"backward requires a scalar loss, got shape {tuple(loss.shape)}")
    if loss in _consumed:
        raise GradientError("backward already ran for this loss; record a new forward pass")
    if not loss.requires_grad:
        raise GradientError("loss was not produced by a recorded forward computation")
    check_finite(loss.detach(), "loss")
    loss.backward()
    _consumed.add(loss)


def zero_grads(parameters: Iterable[torch.Tensor]) -> None:
    """Reset gradients to explicit zeros of the parameter's shape."""
    for parameter in parameters:
        if parameter.grad is None:
            parameter.grad = torch.zeros_like(parameter)
        else:
            parameter.grad.zero_()


def grad_of(parameter: torch.Tensor) -> torch.Tensor:
    """Gradient of a parameter, zeros if no backward pass has reached it yet."""
    if parameter.grad is None:
        return torch.zeros_like(parameter)
    return parameter.grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    """
    Elementwise relative error |a - n| / max(|a|, |n|, floor).

    The floor is 1e-3 of the largest numeric magnitude (at least 1e-8), so
    entries far below the tensor's gradient scale are judged on that scale.
    """
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    scale = float(np.max(np.abs(numeric))) if numeric.size else 0.0
    floor = max(1e-8, 1e-3 * scale)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return np.abs(analytic - numeric) / denom


def numerical_gradient(
    func: Callable[[], torch.Tensor],
    tensor: torch.Tensor,
    step: float = GRADCHECK_STEP,
    kink_ratio: float = GRADCHECK_KINK_RATIO,
    max_refinements: int = GRADCHECK_MAX_REFINEMENTS,
    min_step: float = GRADCHECK_MIN_STEP,
) -> np.ndarray:
    """
    Central finite differences of a scalar function with respect to ``tensor``.

    ``tensor`` is perturbed in place, one element at a time, and restored.
    The one-sided slopes of an element disagree by its second difference
    |f(x + h) - 2 f(x) + f(x - h)| / h. When that exceeds ``kink_ratio`` of
    the estimate, the element is re-measured with a tenfold smaller step:

    - a second difference that shrinks about tenfold is curvature, and the
      original estimate is kept;
    - one that collapses means a kink lay between the two steps, and the
      smaller step's estimate is taken;
    - one that barely shrinks means a kink within the smaller step, and the
      step is reduced again, never below ``min_step``.

    Args:
        func: Zero-argument callable returning a scalar tensor
        tensor: Leaf tensor the function reads
        step: Initial perturbation size
        kink_ratio: Allowed one-sided disagreement relative to the estimate
        max_refinements: Step reductions per element
        min_step: Smallest step ever used

    Returns:
        numpy array shaped like ``tensor``
    """
    n = tensor.numel()
    central = np.zeros(n, dtype=np.float64)
    disagreement = np.zeros(n, dtype=np.float64)
    flat = tensor.data.view(-1)
    low, high = GRADCHECK_CURVATURE_BAND

    def measure(i: int, h: float, base: float) -> Tuple[float, float]:
        original = flat[i].item()
        flat[i] = original + h
        plus = float(func())
        flat[i] = original - h
        minus = float(func())
        flat[i] = original
        return (plus - minus) / (2.0 * h), abs(plus - 2.0 * base + minus) / h

    with torch.no_grad():
        base = float(func())
        for i in range(n):
            central[i], disagreement[i] = measure(i, step, base)

        # thresholds share the floor used by ``relative_error``
        scale = float(np.max(np.abs(central))) if n else 0.0
        floor = max(1e-8, 1e-3 * scale)
        # second differences below this are rounding noise in f
        rounding = 8.0 * np.finfo(np.float64).eps * abs(base) / step
        for i in range(n):
            if disagreement[i] <= max(kink_ratio * max(abs(central[i]), floor), rounding):
                continue
            h, previous = step, disagreement[i]
            for _ in range(max_refinements):
                h /= 10.0
                if h < min_step * (1.0 - 1e-6):
                    break
                estimate, spread = measure(i, h, base)
                ratio = spread / previous
                if low <= ratio <= high:
                    break
                central[i], previous = estimate, spread
                if ratio < low:
                    break
    return central.reshape(tuple(tensor.shape))


@dataclass
class GradCheckResult:
    """Outcome of a finite-difference comparison for one named tensor."""

    name: str
    max_relative_error: float
    passed: bool
    n_elements: int


@dataclass
class GradCheckReport:
    """Results for every tensor checked in one run."""

    label: str
    results: List[GradCheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)

    @property
    def max_relative_error(self) -> float:
        return max((r.max_relative_error for r in self.results), default=0.0)

    def to_records(self) -> List[Dict[str, object]]:
        return [
            {
                "check": self.label,
                "tensor": r.name,
                "max_relative_error": r.max_relative_error,
                "n_elements": r.n_elements,
                "passed": r.passed,
            }
            for r in self.results
        ]


def check_gradients(
    func: Callable[[], torch.Tensor],
    tensors: Dict[str, torch.Tensor],
    label: str = "gradcheck",
    step: float = GRADCHECK_STEP,
    tolerance: float = GRADCHECK_TOLERANCE,
) -> GradCheckReport:
    """
    Compare reverse-mode gradients against central finite differences.

    Args:
        func: Zero-argument callable recording a forward pass and returning a scalar
        tensors: Named float64 leaf tensors with ``requires_grad`` set
        label: Name of the check, carried into the report
        step: Finite-difference step
        tolerance: Maximum allowed relative error; absolute error for tensors whose
            analytic gradient is exactly zero

    Returns:
        GradCheckReport with one result per tensor
    """
    for name, tensor in tensors.items():
        if tensor.dtype != CHECK_DTYPE:
            raise PerceptiveNetValidationError(f"gradient checks require float64, {name} is {tensor.dtype}")
    zero_grads(tensors.values())
    backward(func())
    analytic = {name: grad_of(t).detach().cpu().numpy().copy() for name, t in tensors.items()}

    report = GradCheckReport(label=label)
    for name, tensor in tensors.items():
        numeric = numerical_gradient(func, tensor, step)
        if analytic[name].any():
            errors = relative_error(analytic[name], numeric)
        else:
            # relative error is undefined against an exactly zero gradient
            errors = np.abs(numeric)
        worst = float(errors.max()) if errors.size else 0.0
        report.results.append(GradCheckResult(name, worst, worst <= tolerance, int(errors.size)))
        logger.debug(f"{label}: {name} max relative error {worst:.3e}")
    return report


def parameter_checksum(parameters: Iterable[Tuple[str, torch.Tensor]]) -> str:
    """Hex digest of parameter names and raw bytes, used to prove immutability."""
    digest = hashlib.sha256()
    for name, parameter in parameters:
        digest.update(name.encode())
        digest.update(parameter.detach().cpu().contiguous().numpy().tobytes())
    return digest.hexdigest()


def set_deterministic(enabled: bool = True, threads: int = 1) -> None:
    """Force deterministic single-threaded kernels for bit-identical reruns."""
    torch.use_deterministic_algorithms(enabled)
    if enabled:
        torch.set_num_threads(threads)


@contextmanager
def deterministic(enabled: bool = True, threads: int = 1) -> Iterator[None]:
    """Deterministic kernels for the duration of the block; previous settings are restored."""
    if not enabled:
        yield
        return
    previous = (torch.are_deterministic_algorithms_enabled(), torch.get_num_threads())
    set_deterministic(True, threads)
    try:
        yield
    finally:
        torch.use_deterministic_algorithms(previous[0])
        torch.set_num_threads(previous[1])
