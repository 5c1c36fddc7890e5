"""Empirical and wavelet-smoothed plug-in estimators of W1, and the rate formulas."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .besov import BesovParams, besov_ipm
from .errors import InvalidDensityError, ShapeError
from .grid import GridDensity
from .transport import DEFAULT_CELL_CAP, w1_empirical, w1_grid
from .wavelet import CoefficientArray, empirical_coeffs, synthesize

BACKENDS = ("oracle", "besov")


def choose_J(n: int, beta: float, d: int) -> int:
    """Largest J with 2^{dJ} <= n^{d/(2 beta + d)}."""
    if n < 2:
        raise ValueError("choose_J needs n >= 2")
    if math.isinf(beta):
        return 0
    return int(math.floor(math.log2(n) / (2 * beta + d) + 1e-12))


def rate_exponent(beta: float, d: int) -> float:
    return (beta + 1) / (2 * beta + d)


def rate(n: float, beta: float, d: int, lower: bool = False) -> float:
    """``n^{-(beta+1)/(2 beta + d)}``, times ``loglog n / log n`` for the lower-bound variant."""
    if n < 3:
        raise ValueError("rate needs n >= 3")
    r = n ** (-rate_exponent(beta, d))
    if lower:
        r *= math.log(math.log(n)) / math.log(n)
    return r


def bias_bound(J: int, beta: float, d: int) -> float:
    """Truncation-bias scale ``(2^{dJ})^{-(beta+1)/d}``."""
    return 2.0 ** (-J * (beta + 1))


def stochastic_bound(n: int, J: int, d: int) -> float:
    """Stochastic-term scale ``n^{-1/2} (2^{dJ})^{1/2 - 1/d}``."""
    return n**-0.5 * 2.0 ** (d * J * (0.5 - 1.0 / d))


@dataclass(frozen=True)
class EstimatorConfig:
    beta: float
    backend: str = "besov"
    J: int | None = None
    clip_negative: bool = True

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.J is not None and self.J < 0:
            raise ValueError("J override must be >= 0")


@dataclass
class SmoothedEstimate:
    value: float
    J: int
    backend: str
    clipped_mass: tuple = (0.0, 0.0)
    clip_bound: float = 0.0  # |W1 change| <= clipped mass * diameter
    extras: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "estimate": self.value,
            "J": self.J,
            "backend": self.backend,
            "clipped_mass": list(self.clipped_mass),
            "clip_bound": self.clip_bound,
        }


def plugin_empirical(X, Y) -> float:
    return w1_empirical(X, Y)


def smoothed_density(coeffs: CoefficientArray, clip_negative: bool = True) -> tuple[GridDensity, float]:
    """Synthesize truncated coefficients at level J+1; clip negatives and renormalize."""
    g = synthesize(coeffs, coeffs.max_level + 1)
    v = g.values
    clipped = float(np.clip(-v, 0, None).sum() / v.size)
    if clipped > 0:
        if not clip_negative:
            raise InvalidDensityError("smoothed density is negative and clipping is disabled")
        v = np.clip(v, 0, None)
        v = v / v.mean()
    return GridDensity(g.d, g.L, v), clipped


def smoothed_estimate(X, Y, config: EstimatorConfig, cell_cap: int = DEFAULT_CELL_CAP) -> SmoothedEstimate:
    x = np.asarray(getattr(X, "points", X), dtype=float)
    y = np.asarray(getattr(Y, "points", Y), dtype=float)
    if x.shape[1] != y.shape[1]:
        raise ShapeError(f"dimension mismatch {x.shape[1]} vs {y.shape[1]}")
    if len(x) < 2 or len(y) < 2:
        raise ValueError("smoothed estimator needs at least two samples per side")
    d = x.shape[1]
    J = config.J if config.J is not None else choose_J(min(len(x), len(y)), config.beta, d)
    u = empirical_coeffs(x, J)
    v = empirical_coeffs(y, J)
    if config.backend == "besov":
        value = besov_ipm(u, v, BesovParams(1.0, "sum", J))
        return SmoothedEstimate(value, J, "besov")
    mu, cx = smoothed_density(u, config.clip_negative)
    nu, cy = smoothed_density(v, config.clip_negative)
    value = w1_grid(mu, nu, cell_cap).cost
    return SmoothedEstimate(value, J, "oracle", (cx, cy), (cx + cy) * math.sqrt(d))


def plugin_smoothed(X, Y, config: EstimatorConfig) -> float:
    return smoothed_estimate(X, Y, config).value
