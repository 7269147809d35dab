"""
Convolution parameterised by trainable Log-Gabor functions.

One independent set of (f, f0, theta, theta0, sigma, psi) per (out, in)
channel pair. Kernels are materialised from the parameters on every forward
pass; the backward pass maps kernel gradients onto the six parameters with
the closed-form partials from ``filterbank``.
"""

import math
from typing import List, Sequence

import numpy as np
import torch

from ..constants import (
    DEFAULT_LOGGABOR_DELTA,
    DEFAULT_LOGGABOR_KERNEL,
    LOGGABOR_MIN_F0,
    LOGGABOR_MIN_LOG_BANDWIDTH,
    LOGGABOR_MIN_SIGMA,
)
from ..difftensor import check_finite, conv2d
from ..exceptions import ShapeMismatchError
from ..filterbank import (
    LOG_GABOR_PARAMS,
    LogGaborParams,
    init_log_gabor_bank,
    log_gabor_kernel_array,
    log_gabor_partials_array,
)
from ..utils.validation import validate_min_int, validate_odd_size
from .base import BaseLayer, same_padding


class LogGaborKernels(torch.autograd.Function):
    """Materialise (out, in, k, k) kernels from (out, in) parameter tensors."""

    @staticmethod
    def forward(ctx, f, f0, theta, theta0, sigma, psi, size, delta):
        params = (f, f0, theta, theta0, sigma, psi)
        arrays = [p.detach().cpu().numpy() for p in params]
        kernels = log_gabor_kernel_array(*arrays, delta, size)
        ctx.save_for_backward(*params)
        ctx.size = size
        ctx.delta = delta
        return torch.from_numpy(np.ascontiguousarray(kernels)).to(dtype=f.dtype, device=f.device)

    @staticmethod
    def backward(ctx, grad_output):
        arrays = [p.detach().cpu().numpy() for p in ctx.saved_tensors]
        partials = log_gabor_partials_array(*arrays, ctx.delta, ctx.size)
        upstream = grad_output.detach().cpu().numpy().astype(np.float64)
        grads = [
            torch.from_numpy((partials[name] * upstream).sum(axis=(-2, -1))).to(
                dtype=grad_output.dtype, device=grad_output.device
            )
            for name in LOG_GABOR_PARAMS
        ]
        return (*grads, None, None)


def _bank_tensor(bank: Sequence[LogGaborParams], name: str, out_channels: int, in_channels: int) -> torch.Tensor:
    values = np.array([getattr(p, name) for p in bank], dtype=np.float64)
    return torch.from_numpy(values.reshape(out_channels, in_channels))


def log_gabor_conv_forward(input: torch.Tensor, bank: Sequence[LogGaborParams], kernel_size: int = DEFAULT_LOGGABOR_KERNEL) -> torch.Tensor:
    """
    Convolve ``input`` with kernels materialised from a fixed bank.

    The bank holds one entry per (out, in) pair in row-major order, so its
    length must be a multiple of the input channel count. Stride 1, same padding.

    Args:
        input: (n, c, h, w) tensor
        bank: out_channels * c parameter sets
        kernel_size: Odd kernel side

    Returns:
        (n, out_channels, h, w) tensor
    """
    kernel_size = validate_odd_size(kernel_size, "kernel_size")
    in_channels = input.shape[1]
    if len(bank) == 0 or len(bank) % in_channels:
        raise ShapeMismatchError(
            "Log-Gabor bank length must be out_channels * in_channels",
            (in_channels,),
            (len(bank),),
        )
    for p in bank:
        p.validate()
    out_channels = len(bank) // in_channels
    deltas = {p.delta for p in bank}
    delta = deltas.pop() if len(deltas) == 1 else DEFAULT_LOGGABOR_DELTA
    params = [_bank_tensor(bank, name, out_channels, in_channels) for name in LOG_GABOR_PARAMS]
    kernels = torch.from_numpy(log_gabor_kernel_array(*[p.numpy() for p in params], delta, kernel_size))
    return conv2d(input, kernels.to(input.dtype), padding=same_padding(kernel_size))


class LogGaborConv2d(BaseLayer):
    """
    Log-Gabor-parameterised convolution, stride 1, same padding.

    Attributes:
        f, f0, theta, theta0, sigma, psi (nn.Parameter): (out, in) learnables
    """

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel_size: int = DEFAULT_LOGGABOR_KERNEL,
        seed: int = 0,
        delta: float = DEFAULT_LOGGABOR_DELTA,
    ):
        super().__init__()
        self.in_channels = validate_min_int(in_channels, 1, "in_channels")
        self.out_channels = validate_min_int(out_channels, 1, "out_channels")
        self.kernel_size = validate_odd_size(kernel_size, "kernel_size")
        self.delta = float(delta)

        bank = init_log_gabor_bank(out_channels * in_channels, in_channels, kernel_size, seed, delta)
        for name in LOG_GABOR_PARAMS:
            tensor = _bank_tensor(bank, name, out_channels, in_channels).to(torch.get_default_dtype())
            self.register_parameter(name, torch.nn.Parameter(tensor))
        self.logger.debug(f"Built {out_channels}x{in_channels} Log-Gabor bank, kernel {kernel_size}")

    def kernels(self) -> torch.Tensor:
        """Kernels as a differentiable function of the bank parameters."""
        return LogGaborKernels.apply(
            self.f, self.f0, self.theta, self.theta0, self.sigma, self.psi, self.kernel_size, self.delta
        )

    def materialise(self) -> torch.Tensor:
        """Current kernels, detached from the graph."""
        with torch.no_grad():
            return self.kernels().detach().clone()

    def bank(self) -> List[LogGaborParams]:
        """Current parameters as a flat row-major list of LogGaborParams."""
        columns = {name: getattr(self, name).detach().cpu().double().numpy().ravel() for name in LOG_GABOR_PARAMS}
        return [
            LogGaborParams(**{name: float(columns[name][k]) for name in LOG_GABOR_PARAMS}, delta=self.delta)
            for k in range(self.out_channels * self.in_channels)
        ]

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        self._require_channels(x, self.in_channels)
        kernels = check_finite(self.kernels(), "log-Gabor kernel materialisation")
        return conv2d(x, kernels.to(x.dtype), padding=same_padding(self.kernel_size))

    @torch.no_grad()
    def project_(self) -> None:
        """Keep f0 and sigma positive and sigma away from f0 so the radial term stays defined."""
        self.f0.clamp_(min=LOGGABOR_MIN_F0)
        self.sigma.clamp_(min=LOGGABOR_MIN_SIGMA)
        log_bandwidth = torch.log(self.sigma / self.f0)
        too_close = log_bandwidth.abs() < LOGGABOR_MIN_LOG_BANDWIDTH
        if bool(too_close.any()):
            above = self.f0 * math.exp(LOGGABOR_MIN_LOG_BANDWIDTH)
            below = self.f0 * math.exp(-LOGGABOR_MIN_LOG_BANDWIDTH)
            # below the sigma floor there is no room on the lower side
            go_up = (log_bandwidth >= 0) | (below < LOGGABOR_MIN_SIGMA)
            pushed = torch.where(go_up, above, below)
            self.sigma.copy_(torch.where(too_close, pushed, self.sigma))
            self.logger.debug(f"Projected {int(too_close.sum())} sigma values away from f0")

    def extra_repr(self) -> str:
        return f"{self.in_channels}, {self.out_channels}, kernel_size={self.kernel_size}, delta={self.delta}"
