"""
Convolution parameterised by trainable Gabor functions.

Used as the Gabor alternative of the first-layer switch. Kernels are the real
part of a Gabor filter in pixel coordinates, built with torch operations so
autograd differentiates them directly.
"""

from typing import List

import numpy as np
import torch

from ..constants import DEFAULT_LOGGABOR_KERNEL
from ..difftensor import conv2d
from ..filterbank import GABOR_PARAMS, GaborParams, init_gabor_bank, pixel_grid
from ..utils.validation import validate_min_int, validate_odd_size
from .base import BaseLayer, same_padding

MIN_GABOR_SIGMA = 0.5
MIN_GABOR_GAMMA = 0.1


class GaborConv2d(BaseLayer):
    """
    Gabor-parameterised convolution, stride 1, same padding.

    Attributes:
        omega, theta, psi, sigma, gamma (nn.Parameter): (out, in) learnables
    """

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int = DEFAULT_LOGGABOR_KERNEL, seed: int = 0):
        super().__init__()
        self.in_channels = validate_min_int(in_channels, 1, "in_channels")
        self.out_channels = validate_min_int(out_channels, 1, "out_channels")
        self.kernel_size = validate_odd_size(kernel_size, "kernel_size")

        bank = init_gabor_bank(out_channels * in_channels, in_channels, kernel_size, seed)
        for name in GABOR_PARAMS:
            values = np.array([getattr(p, name) for p in bank], dtype=np.float64).reshape(out_channels, in_channels)
            self.register_parameter(name, torch.nn.Parameter(torch.tensor(values, dtype=torch.get_default_dtype())))

        x, y = pixel_grid(kernel_size)
        self.register_buffer("grid_x", torch.tensor(x, dtype=torch.get_default_dtype()), persistent=False)
        self.register_buffer("grid_y", torch.tensor(y, dtype=torch.get_default_dtype()), persistent=False)

    def kernels(self) -> torch.Tensor:
        """(out, in, k, k) real-part Gabor kernels."""
        def expand(p: torch.Tensor) -> torch.Tensor:
            return p[..., None, None]

        theta = expand(self.theta)
        x = self.grid_x.to(theta.dtype)
        y = self.grid_y.to(theta.dtype)
        xr = x * torch.cos(theta) + y * torch.sin(theta)
        yr = -x * torch.sin(theta) + y * torch.cos(theta)
        sigma = expand(self.sigma)
        envelope = torch.exp(-(xr ** 2 + expand(self.gamma) ** 2 * yr ** 2) / (2.0 * sigma ** 2))
        return envelope * torch.cos(expand(self.omega) * xr + expand(self.psi))

    def materialise(self) -> torch.Tensor:
        with torch.no_grad():
            return self.kernels().detach().clone()

    def bank(self) -> List[GaborParams]:
        columns = {name: getattr(self, name).detach().cpu().double().numpy().ravel() for name in GABOR_PARAMS}
        return [
            GaborParams(**{name: float(columns[name][k]) for name in GABOR_PARAMS})
            for k in range(self.out_channels * self.in_channels)
        ]

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        self._require_channels(x, self.in_channels)
        return conv2d(x, self.kernels().to(x.dtype), padding=same_padding(self.kernel_size))

    @torch.no_grad()
    def project_(self) -> None:
        self.sigma.clamp_(min=MIN_GABOR_SIGMA)
        self.gamma.clamp_(min=MIN_GABOR_GAMMA)

    def extra_repr(self) -> str:
        return f"{self.in_channels}, {self.out_channels}, kernel_size={self.kernel_size}"
