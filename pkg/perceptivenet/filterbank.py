"""
Closed-form Gabor and Log-Gabor kernels.

Kernels are sampled on a size x size grid centred at (0, 0); row index is y,
column index is x. Gabor kernels use pixel coordinates. Log-Gabor kernels use
coordinates normalised to [-1, 1] so that f0 and sigma are scale-free.

Every function here is pure. The private ``_log_gabor_terms`` broadcasts over
leading parameter axes so the convolution layer can build a whole bank, and
its analytic partial derivatives, in one call.
"""

import math
from dataclasses import asdict, dataclass
from typing import Dict, List, Tuple

import numpy as np

from .constants import (
    DEFAULT_LOGGABOR_DELTA,
    GABOR_GAMMA,
    GABOR_OMEGA_RANGE,
    GABOR_SIGMA,
    LOGGABOR_F0_RANGE,
    LOGGABOR_MAX_SCALES,
    LOGGABOR_SIGMA_RATIO,
)
from .exceptions import PerceptiveNetValidationError
from .utils.cache import cached_readonly, create_cache
from .utils.logging import get_logger
from .utils.validation import validate_min_int, validate_odd_size, validate_positive

logger = get_logger(__name__)

LOG_GABOR_PARAMS = ("f", "f0", "theta", "theta0", "sigma", "psi")
GABOR_PARAMS = ("omega", "theta", "psi", "sigma", "gamma")

_grid_cache = create_cache(maxsize=32)


@dataclass(frozen=True)
class GaborParams:
    """Per-filter Gabor parameters: radial frequency, orientation, phase, envelope scale, aspect."""

    omega: float
    theta: float
    psi: float
    sigma: float
    gamma: float

    def validate(self) -> "GaborParams":
        validate_positive(self.sigma, "sigma")
        validate_positive(self.gamma, "gamma")
        return self

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class LogGaborParams:
    """Per-filter Log-Gabor parameters; the six learnables plus the constant delta."""

    f: float
    f0: float
    theta: float
    theta0: float
    sigma: float
    psi: float
    delta: float = DEFAULT_LOGGABOR_DELTA

    def validate(self) -> "LogGaborParams":
        validate_positive(self.f0, "f0")
        validate_positive(self.sigma, "sigma")
        validate_positive(self.delta, "delta")
        if math.log(self.sigma / self.f0) == 0.0:
            logger.error(f"sigma equals f0 ({self.sigma})")
            raise PerceptiveNetValidationError(f"sigma must differ from f0, both are {self.sigma}")
        return self

    def learnables(self) -> Tuple[float, ...]:
        return tuple(getattr(self, name) for name in LOG_GABOR_PARAMS)

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class Kernel2D:
    """An odd-sized square kernel grid."""

    size: int
    values: np.ndarray

    def __post_init__(self):
        validate_odd_size(self.size)
        if self.values.shape != (self.size, self.size):
            raise PerceptiveNetValidationError(
                f"Kernel values of shape {self.values.shape} do not match size {self.size}"
            )
        if not np.all(np.isfinite(self.values)):
            raise PerceptiveNetValidationError("Kernel values must be finite")

    def at(self, x: int, y: int) -> float:
        """Value at integer offset (x, y) from the centre."""
        half = (self.size - 1) // 2
        return float(self.values[y + half, x + half])


@dataclass(frozen=True)
class LogGaborPartials:
    """Partial derivatives of a Log-Gabor kernel with respect to its learnables."""

    f: Kernel2D
    f0: Kernel2D
    theta: Kernel2D
    theta0: Kernel2D
    sigma: Kernel2D
    psi: Kernel2D

    def as_dict(self) -> Dict[str, Kernel2D]:
        return {name: getattr(self, name) for name in LOG_GABOR_PARAMS}


@cached_readonly(_grid_cache)
def pixel_grid(size: int) -> Tuple[np.ndarray, np.ndarray]:
    """Integer pixel offsets (x, y), each of shape (size, size)."""
    half = (size - 1) // 2
    axis = np.arange(-half, half + 1, dtype=np.float64)
    y, x = np.meshgrid(axis, axis, indexing="ij")
    return x, y


@cached_readonly(_grid_cache)
def normalised_grid(size: int) -> Tuple[np.ndarray, np.ndarray]:
    """Pixel offsets scaled to [-1, 1]."""
    half = (size - 1) // 2
    x, y = pixel_grid(size)
    return x / half, y / half


def _rotate(x: np.ndarray, y: np.ndarray, theta) -> Tuple[np.ndarray, np.ndarray]:
    cos_t = np.cos(theta)
    sin_t = np.sin(theta)
    return x * cos_t + y * sin_t, -x * sin_t + y * cos_t


def _wrap(angle: np.ndarray) -> np.ndarray:
    """Wrap angles to (-pi, pi]."""
    return np.arctan2(np.sin(angle), np.cos(angle))


def gabor_kernel(p: GaborParams, size: int, part: str = "real") -> Kernel2D:
    """
    Sample a Gabor filter: exp(-(x'^2 + gamma^2 y'^2) / (2 sigma^2)) times cos or sin of (omega x' + psi).

    Args:
        p: Filter parameters
        size: Odd side length
        part: "real" (cosine carrier) or "imaginary" (sine carrier)

    Returns:
        Kernel2D in pixel coordinates
    """
    size = validate_odd_size(size)
    p.validate()
    if part not in ("real", "imaginary"):
        raise PerceptiveNetValidationError(f"part must be 'real' or 'imaginary', got {part!r}")
    x, y = pixel_grid(size)
    xr, yr = _rotate(x, y, p.theta)
    envelope = np.exp(-(xr ** 2 + p.gamma ** 2 * yr ** 2) / (2.0 * p.sigma ** 2))
    phase = p.omega * xr + p.psi
    carrier = np.cos(phase) if part == "real" else np.sin(phase)
    return Kernel2D(size, envelope * carrier)


def log_gabor_radial(r: float, f0: float, sigma: float) -> float:
    """
    Radial component exp(-(log(r/f0))^2 / (2 (log(sigma/f0))^2)).

    Raises:
        PerceptiveNetValidationError: If r, f0 or sigma is not positive or sigma equals f0
    """
    validate_positive(r, "r")
    LogGaborParams(f=f0, f0=f0, theta=0.0, theta0=0.0, sigma=sigma, psi=0.0).validate()
    return math.exp(-math.log(r / f0) ** 2 / (2.0 * math.log(sigma / f0) ** 2))


def log_gabor_angular(phi: float, theta0: float, sigma: float) -> float:
    """
    Angular component exp(-(phi - theta0)^2 / (2 sigma^2)), evaluated literally.

    Raises:
        PerceptiveNetValidationError: If sigma is not positive
    """
    validate_positive(sigma, "sigma")
    return math.exp(-((phi - theta0) ** 2) / (2.0 * sigma ** 2))


def log_gabor_freq_response(f: float, f0: float, sigma: float) -> float:
    """
    Frequency response of a Log-Gabor filter: Gaussian on a log-frequency axis.

    Peaks at 1 for f = f0 and falls to 0 as f -> 0+ (no DC component).
    """
    validate_positive(f, "f")
    LogGaborParams(f=f0, f0=f0, theta=0.0, theta0=0.0, sigma=sigma, psi=0.0).validate()
    return math.exp(-math.log(f / f0) ** 2 / (2.0 * math.log(sigma / f0) ** 2))


def _log_gabor_terms(f, f0, theta, theta0, sigma, psi, delta: float, size: int) -> Dict[str, np.ndarray]:
    """
    Shared intermediate terms of the kernel and its partials.

    Parameter arrays of shape S broadcast to terms of shape S + (size, size).
    """
    f, f0, theta, theta0, sigma, psi = (
        np.asarray(v, dtype=np.float64)[..., None, None] for v in (f, f0, theta, theta0, sigma, psi)
    )
    x, y = normalised_grid(size)
    xr, yr = _rotate(x, y, theta)
    r = np.sqrt(xr ** 2 + yr ** 2 + delta)
    centre = (x == 0) & (y == 0)
    # atan2 of signed zeros is not 0 for every theta; pin the centre angle.
    phi = np.where(centre, 0.0, np.arctan2(yr, xr))
    log_ratio = np.log(r / f0)
    log_bandwidth = np.log(sigma / f0)
    radial = np.exp(-log_ratio ** 2 / (2.0 * log_bandwidth ** 2))
    angle = _wrap(phi - theta0)
    angular = np.exp(-angle ** 2 / (2.0 * sigma ** 2))
    phase = 2.0 * np.pi * f * r + psi
    norm = 1.0 / (2.0 * np.pi * sigma ** 2)
    return {
        "f0": f0,
        "sigma": sigma,
        "r": r,
        "centre": centre,
        "log_ratio": log_ratio,
        "log_bandwidth": log_bandwidth,
        "radial": radial,
        "angle": angle,
        "angular": angular,
        "phase": phase,
        "norm": norm,
        "kernel": radial * angular * np.cos(phase) * norm,
    }


def log_gabor_kernel_array(f, f0, theta, theta0, sigma, psi, delta: float, size: int) -> np.ndarray:
    """Vectorised Log-Gabor kernels for parameter arrays; returns shape S + (size, size)."""
    return _log_gabor_terms(f, f0, theta, theta0, sigma, psi, delta, size)["kernel"]


def log_gabor_partials_array(f, f0, theta, theta0, sigma, psi, delta: float, size: int) -> Dict[str, np.ndarray]:
    """
    Vectorised analytic partials of the Log-Gabor kernel.

    Returns:
        Mapping of parameter name to an array of shape S + (size, size)
    """
    t = _log_gabor_terms(f, f0, theta, theta0, sigma, psi, delta, size)
    kernel = t["kernel"]
    a, b = t["log_ratio"], t["log_bandwidth"]
    envelope = t["radial"] * t["angular"] * t["norm"]
    sin_phase = np.sin(t["phase"])
    sigma = t["sigma"]
    angle_term = kernel * t["angle"] / sigma ** 2

    # A rotation moves every pixel's polar angle by -theta, except the centre whose angle is fixed.
    d_theta = np.where(t["centre"], 0.0, angle_term)
    return {
        "f": -envelope * sin_phase * 2.0 * np.pi * t["r"],
        "f0": kernel * a * (1.0 - a / b) / (t["f0"] * b ** 2),
        "theta": d_theta,
        "theta0": angle_term,
        "sigma": kernel * (a ** 2 / (sigma * b ** 3) + t["angle"] ** 2 / sigma ** 3 - 2.0 / sigma),
        "psi": -envelope * sin_phase,
    }


def log_gabor_kernel(p: LogGaborParams, size: int) -> Kernel2D:
    """
    Sample a Log-Gabor filter.

    g(x, y) = g_r(r) * g_theta(phi) * cos(2 pi f r + psi) / (2 pi sigma^2), with
    r = sqrt(x'^2 + y'^2 + delta) and phi the polar angle of (x', y').

    Args:
        p: Filter parameters
        size: Odd side length

    Returns:
        Kernel2D on the normalised grid
    """
    size = validate_odd_size(size)
    p.validate()
    values = log_gabor_kernel_array(p.f, p.f0, p.theta, p.theta0, p.sigma, p.psi, p.delta, size)
    return Kernel2D(size, values)


def kernel_param_gradients(p: LogGaborParams, size: int) -> LogGaborPartials:
    """
    Analytic partial derivatives of ``log_gabor_kernel`` with respect to f, f0, theta, theta0, sigma, psi.

    Args:
        p: Filter parameters
        size: Odd side length

    Returns:
        LogGaborPartials holding one Kernel2D per learnable
    """
    size = validate_odd_size(size)
    p.validate()
    partials = log_gabor_partials_array(p.f, p.f0, p.theta, p.theta0, p.sigma, p.psi, p.delta, size)
    return LogGaborPartials(**{name: Kernel2D(size, values) for name, values in partials.items()})


def _scale_orientation_layout(n_units: int) -> Tuple[np.ndarray, np.ndarray, int, int]:
    """Assign each unit a scale index and an orientation index covering both evenly."""
    n_scales = min(LOGGABOR_MAX_SCALES, n_units)
    n_orientations = int(math.ceil(n_units / n_scales))
    units = np.arange(n_units)
    return units % n_scales, units // n_scales, n_scales, n_orientations


def _validate_bank_args(n_filters: int, in_channels: int, kernel_size: int) -> Tuple[int, int]:
    n_filters = validate_min_int(n_filters, 1, "n_filters")
    in_channels = validate_min_int(in_channels, 1, "in_channels")
    validate_odd_size(kernel_size, "kernel_size")
    return n_filters, in_channels


def init_log_gabor_bank(
    n_filters: int, in_channels: int, kernel_size: int, seed: int, delta: float = DEFAULT_LOGGABOR_DELTA
) -> List[LogGaborParams]:
    """
    Initial Log-Gabor parameters for a bank of ``n_filters`` kernels.

    Kernel k belongs to output unit k // in_channels; units share a scale and an
    orientation. f0 is log-spaced over [0.15, 0.85], sigma = 0.55 * f0, the
    carrier f starts equal to f0, theta = theta0 is evenly spaced over [0, pi),
    and psi is drawn from Unif[0, pi) per kernel.

    Args:
        n_filters: Number of kernels (out_channels * in_channels for a layer)
        in_channels: Input channels per output unit
        kernel_size: Odd side length the bank will be sampled at
        seed: Seed of the phase draw

    Returns:
        List of LogGaborParams, deterministic given the arguments
    """
    n_filters, in_channels = _validate_bank_args(n_filters, in_channels, kernel_size)
    n_units = int(math.ceil(n_filters / in_channels))
    scale_idx, orient_idx, n_scales, n_orientations = _scale_orientation_layout(n_units)
    f0_values = np.geomspace(*LOGGABOR_F0_RANGE, num=n_scales)
    theta_values = np.arange(n_orientations) * np.pi / n_orientations

    rng = np.random.default_rng(seed)
    psi = rng.uniform(0.0, np.pi, size=n_filters)

    bank = []
    for k in range(n_filters):
        unit = k // in_channels
        f0 = float(f0_values[scale_idx[unit]])
        theta = float(theta_values[orient_idx[unit]])
        bank.append(LogGaborParams(
            f=f0,
            f0=f0,
            theta=theta,
            theta0=theta,
            sigma=LOGGABOR_SIGMA_RATIO * f0,
            psi=float(psi[k]),
            delta=delta,
        ))
    logger.debug(f"Initialised Log-Gabor bank of {n_filters} kernels over {n_scales} scales")
    return bank


def init_gabor_bank(n_filters: int, in_channels: int, kernel_size: int, seed: int) -> List[GaborParams]:
    """
    Initial Gabor parameters for a bank of ``n_filters`` kernels.

    omega is log-spaced over [pi/8, pi/2] rad/pixel, gamma = 1, sigma = 2 px,
    theta evenly spaced over [0, pi), psi from Unif[0, pi).
    """
    n_filters, in_channels = _validate_bank_args(n_filters, in_channels, kernel_size)
    n_units = int(math.ceil(n_filters / in_channels))
    scale_idx, orient_idx, n_scales, n_orientations = _scale_orientation_layout(n_units)
    omega_values = np.geomspace(*GABOR_OMEGA_RANGE, num=n_scales)
    theta_values = np.arange(n_orientations) * np.pi / n_orientations

    rng = np.random.default_rng(seed)
    psi = rng.uniform(0.0, np.pi, size=n_filters)

    return [
        GaborParams(
            omega=float(omega_values[scale_idx[k // in_channels]]),
            theta=float(theta_values[orient_idx[k // in_channels]]),
            psi=float(psi[k]),
            sigma=GABOR_SIGMA,
            gamma=GABOR_GAMMA,
        )
        for k in range(n_filters)
    ]


def kernel_dc_component(kernel: Kernel2D) -> float:
    """Response of the kernel to a constant image (the sum of its taps)."""
    return float(np.sum(kernel.values))


def kernel_spectrum(kernel: Kernel2D, pad_to: int = 64) -> np.ndarray:
    """
    Magnitude spectrum of the zero-padded kernel, DC at the centre.

    Args:
        kernel: Kernel to analyse
        pad_to: Side of the zero-padded transform (>= kernel size)

    Returns:
        (pad_to, pad_to) array of |FFT|
    """
    pad_to = max(pad_to, kernel.size)
    spectrum = np.fft.fft2(kernel.values, s=(pad_to, pad_to))
    return np.abs(np.fft.fftshift(spectrum))


def radial_profile(spectrum: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Radially averaged spectrum.

    Returns:
        (frequencies in cycles per pixel, mean magnitude per integer radius bin)
    """
    n = spectrum.shape[0]
    centre = n // 2
    yy, xx = np.indices(spectrum.shape)
    radius = np.rint(np.hypot(xx - centre, yy - centre)).astype(int)
    counts = np.bincount(radius.ravel())
    sums = np.bincount(radius.ravel(), weights=spectrum.ravel())
    profile = sums / np.maximum(counts, 1)
    limit = centre + 1
    return np.arange(limit) / n, profile[:limit]


def peak_frequency(kernel: Kernel2D, pad_to: int = 64) -> float:
    """Radial frequency (cycles per pixel) where the kernel's averaged spectrum peaks."""
    freqs, profile = radial_profile(kernel_spectrum(kernel, pad_to))
    return float(freqs[int(np.argmax(profile))])
