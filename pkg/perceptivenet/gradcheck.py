"""
Finite-difference verification of every differentiable component.

Each check builds a small float64 instance from a seed, records a scalar
loss and compares reverse-mode gradients against central differences.
"""

from dataclasses import replace
from typing import Callable, Dict, List

import numpy as np
import torch

from .constants import (
    FirstLayers,
    GRADCHECK_STEP,
    GRADCHECK_TOLERANCE,
    KERNEL_GRADCHECK_STEP,
    Variants,
)
from .difftensor import CHECK_DTYPE, GradCheckReport, GradCheckResult, check_gradients, relative_error
from .filterbank import LOG_GABOR_PARAMS, LogGaborParams, kernel_param_gradients, log_gabor_kernel
from .layers.blocks import DOWNSAMPLE_MIXPOOL, DecoderResBlock, EncoderResBlock
from .layers.dilated import AveragedDilatedConv2d
from .layers.loggabor import LogGaborConv2d
from .layers.pooling import MixPoolSpec, mix_pool
from .models.config import ModelConfig
from .models.segmodel import build_model
from .training.loss import cross_entropy_loss
from .utils.logging import get_logger

logger = get_logger(__name__)

TOY_RATES = (1, 2)


def random_log_gabor_params(rng: np.random.Generator) -> LogGaborParams:
    """A Log-Gabor parameter set away from the sigma = f0 singularity."""
    f0 = rng.uniform(0.15, 0.85)
    return LogGaborParams(
        f=rng.uniform(0.1, 1.0),
        f0=f0,
        theta=rng.uniform(0.0, np.pi),
        theta0=rng.uniform(0.0, np.pi),
        sigma=f0 * rng.uniform(0.4, 0.8),
        psi=rng.uniform(0.0, 2.0 * np.pi),
    )


def kernel_partial_errors(p: LogGaborParams, size: int = 7, step: float = KERNEL_GRADCHECK_STEP) -> Dict[str, float]:
    """Max relative error of each analytic kernel partial against central differences."""
    analytic = kernel_param_gradients(p, size).as_dict()
    errors = {}
    for name in LOG_GABOR_PARAMS:
        value = getattr(p, name)
        plus = log_gabor_kernel(replace(p, **{name: value + step}), size).values
        minus = log_gabor_kernel(replace(p, **{name: value - step}), size).values
        numeric = (plus - minus) / (2.0 * step)
        errors[name] = float(relative_error(analytic[name].values, numeric).max())
    return errors


def check_kernel_partials(
    n_draws: int = 50, seed: int = 0, size: int = 7, tolerance: float = GRADCHECK_TOLERANCE
) -> GradCheckReport:
    """Worst error per parameter over ``n_draws`` random parameter sets."""
    rng = np.random.default_rng(seed)
    worst = {name: 0.0 for name in LOG_GABOR_PARAMS}
    for _ in range(n_draws):
        for name, error in kernel_partial_errors(random_log_gabor_params(rng), size).items():
            worst[name] = max(worst[name], error)
    report = GradCheckReport(label="loggabor_kernel")
    for name in LOG_GABOR_PARAMS:
        report.results.append(GradCheckResult(name, worst[name], worst[name] <= tolerance, n_draws * size * size))
    return report


def _randn(generator: torch.Generator, *shape: int, requires_grad: bool = True) -> torch.Tensor:
    return torch.randn(*shape, generator=generator, dtype=CHECK_DTYPE).requires_grad_(requires_grad)


def _weighted_sum(generator: torch.Generator, forward: Callable[[], torch.Tensor], shape) -> Callable[[], torch.Tensor]:
    weights = torch.randn(*shape, generator=generator, dtype=CHECK_DTYPE)
    return lambda: (forward() * weights).sum()


def _seeded_module(factory: Callable[[], torch.nn.Module], seed: int) -> torch.nn.Module:
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        return factory().to(CHECK_DTYPE)


def check_log_gabor_conv(seed: int = 0, step: float = GRADCHECK_STEP) -> GradCheckReport:
    g = torch.Generator().manual_seed(seed)
    layer = _seeded_module(lambda: LogGaborConv2d(2, 3, kernel_size=5, seed=seed), seed)
    x = _randn(g, 1, 2, 6, 6)
    loss = _weighted_sum(g, lambda: layer(x), (1, 3, 6, 6))
    tensors = {name: getattr(layer, name) for name in LOG_GABOR_PARAMS}
    tensors["input"] = x
    return check_gradients(loss, tensors, "log_gabor_conv", step)


def check_mix_pool(seed: int = 0, step: float = GRADCHECK_STEP) -> GradCheckReport:
    g = torch.Generator().manual_seed(seed)
    x = _randn(g, 1, 2, 4, 4)
    loss = _weighted_sum(g, lambda: mix_pool(x, MixPoolSpec()), (1, 2, 2, 2))
    return check_gradients(loss, {"input": x}, "mix_pool", step)


def check_avg_dilated_conv(seed: int = 0, step: float = GRADCHECK_STEP) -> GradCheckReport:
    g = torch.Generator().manual_seed(seed)
    layer = _seeded_module(lambda: AveragedDilatedConv2d(2, 2, rates=(1, 2, 3)), seed)
    x = _randn(g, 1, 2, 8, 8)
    loss = _weighted_sum(g, lambda: layer(x), (1, 2, 8, 8))
    tensors = dict(layer.named_parameters())
    tensors["input"] = x
    return check_gradients(loss, tensors, "avg_dilated_conv", step)


def check_encoder_block(seed: int = 0, step: float = GRADCHECK_STEP) -> GradCheckReport:
    g = torch.Generator().manual_seed(seed)
    block = _seeded_module(lambda: EncoderResBlock(2, 3, DOWNSAMPLE_MIXPOOL, dilation_rates=TOY_RATES), seed)
    x = _randn(g, 2, 2, 8, 8)
    loss = _weighted_sum(g, lambda: block(x), (2, 3, 4, 4))
    tensors = dict(block.named_parameters())
    tensors["input"] = x
    return check_gradients(loss, tensors, "encoder_res_block", step)


def check_decoder_block(seed: int = 0, step: float = GRADCHECK_STEP) -> GradCheckReport:
    g = torch.Generator().manual_seed(seed)
    block = _seeded_module(lambda: DecoderResBlock(3, 2, 2, dilation_rates=TOY_RATES), seed)
    x = _randn(g, 2, 3, 4, 4)
    skip = _randn(g, 2, 2, 8, 8)
    loss = _weighted_sum(g, lambda: block(x, skip), (2, 2, 8, 8))
    tensors = dict(block.named_parameters())
    tensors.update(input=x, skip=skip)
    return check_gradients(loss, tensors, "decoder_res_block", step)


def check_cross_entropy(seed: int = 0, step: float = GRADCHECK_STEP) -> GradCheckReport:
    g = torch.Generator().manual_seed(seed)
    logits = _randn(g, 2, 2, 2, 2)
    mask = torch.randint(0, 2, (2, 2, 2), generator=g)
    return check_gradients(lambda: cross_entropy_loss(logits, mask), {"logits": logits}, "cross_entropy", step)


def check_assembly(seed: int = 0, step: float = GRADCHECK_STEP) -> GradCheckReport:
    """End to end through a two-level network: first layer, head and input."""
    g = torch.Generator().manual_seed(seed)
    config = ModelConfig(
        variant=Variants.PERCEPTIVENET,
        first_layer=FirstLayers.LOGGABOR,
        base_channels=4,
        depth=2,
        n_classes=2,
        loggabor_kernel=5,
        dilation_rates=TOY_RATES,
    )
    model = build_model(config, seed).to(CHECK_DTYPE)
    x = _randn(g, 2, 3, 8, 8)
    mask = torch.randint(0, 2, (2, 8, 8), generator=g)
    first = model.stem.first
    tensors = {f"stem.{name}": getattr(first, name) for name in LOG_GABOR_PARAMS}
    tensors.update({"head.weight": model.head.weight, "head.bias": model.head.bias, "input": x})
    return check_gradients(lambda: cross_entropy_loss(model(x), mask), tensors, "assembly", step)


LAYER_CHECKS = (
    check_log_gabor_conv,
    check_mix_pool,
    check_avg_dilated_conv,
    check_encoder_block,
    check_decoder_block,
    check_cross_entropy,
    check_assembly,
)


def run_gradient_suite(seed: int = 0, n_draws: int = 50, kernel_size: int = 7) -> List[GradCheckReport]:
    """Kernel partials over random draws followed by every layer check."""
    reports = [check_kernel_partials(n_draws, seed, kernel_size)]
    for check in LAYER_CHECKS:
        reports.append(check(seed))
    for report in reports:
        status = "passed" if report.passed else "FAILED"
        logger.info(f"gradcheck {report.label}: {status}, max relative error {report.max_relative_error:.3e}")
    return reports
