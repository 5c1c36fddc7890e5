"""Density models, the perturbation family nu_theta, Holder-ball checks and exact sampling."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyInputError, InvalidDensityError, ResolutionError, ShapeError
from .grid import GridDensity
from .wavelet import CoefficientArray, analyze, synthesize

__all__ = [
    "GridDensity",
    "WaveletDensity",
    "SampleSet",
    "MembershipReport",
    "make_nu_theta",
    "max_tau",
    "holder_membership",
    "sample",
    "coefficients_of",
    "decay_bound",
]

# max_tau stays strictly inside the positivity region by this relative margin
POSITIVITY_MARGIN = 1e-9


@dataclass
class WaveletDensity:
    """Density ``1 + sum perturbation * atom`` with a zero-mean perturbation."""

    perturbation: CoefficientArray

    def __post_init__(self):
        if abs(self.perturbation.scaling) > 0:
            raise InvalidDensityError("perturbation must have zero scaling coefficient")

    @property
    def d(self) -> int:
        return self.perturbation.d

    @property
    def max_level(self) -> int:
        return self.perturbation.max_level

    def coefficients(self, J: int | None = None) -> CoefficientArray:
        c = self.perturbation.copy()
        c.levels[0].flat[0] = 1.0
        return c if J is None else c.resized(J)

    def to_grid(self, L: int | None = None) -> GridDensity:
        L = self.max_level + 1 if L is None else L
        g = synthesize(self.coefficients(), L)
        return GridDensity(g.d, g.L, g.values)


@dataclass
class SampleSet:
    """n points in [0,1)^d, with the seed and a label of the source density."""

    points: np.ndarray = field(repr=False)
    seed: int | None = None
    source: str = ""

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if self.points.size == 0:
            raise EmptyInputError("sample set is empty")
        if np.any(self.points < 0) or np.any(self.points >= 1):
            raise ValueError("sample coordinates must lie in [0,1)")

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{i}" for i in range(self.d)])
            for row in self.points:
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path, source: str | None = None) -> "SampleSet":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if len(rows) < 2:
            raise EmptyInputError(f"{path}: no sample rows")
        header = rows[0]
        if header != [f"x{i}" for i in range(len(header))]:
            raise ShapeError(f"{path}: header must be x0,...,x{{d-1}}, got {header}")
        pts = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
        return cls(pts, source=source or Path(path).name)


def decay_bound(j: int, d: int, beta: float, M: float = 1.0) -> float:
    """Largest |coefficient| allowed at level j in the Besov ball B^{beta,inf}_inf(M)."""
    return M * float(2.0 ** (-d * j * (beta / d + 0.5)))


def max_tau(n: int, J: int, beta: float, d: int) -> float:
    """Largest perturbation amplitude keeping nu_theta in the beta-ball (M=1) and positive."""
    smooth = math.sqrt(n) * decay_bound(J, d, beta)
    cap = math.sqrt(n) * 2.0 ** (-d * J / 2) * (1 - POSITIVITY_MARGIN)
    return min(smooth, cap)


def make_nu_theta(J: int, theta, n: int, d: int) -> WaveletDensity:
    """``1 + n^{-1/2} sum_k theta_k h_{J,k,(1..1)}`` for the 2^{dJ} cells at level J.

    ``theta`` is either flat in row-major cell order or shaped ``(2^J,)*d``.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.size != 2 ** (d * J):
        raise ShapeError(f"theta needs {2 ** (d * J)} entries, got {theta.size}")
    theta = theta.reshape((2**J,) * d)
    if np.max(np.abs(theta)) * 2.0 ** (d * J / 2) / math.sqrt(n) >= 1:
        raise InvalidDensityError("perturbation too large: density would not stay positive")
    pert = CoefficientArray.zeros(d, J)
    pert.levels[J][2**d - 1] = theta / math.sqrt(n)
    return WaveletDensity(pert)


def coefficients_of(density, J: int) -> CoefficientArray:
    """Haar coefficients of a grid or wavelet density up to level J."""
    if isinstance(density, WaveletDensity):
        return density.coefficients(J)
    if isinstance(density, GridDensity):
        return analyze(density, J)
    raise TypeError(f"unsupported density type {type(density).__name__}")


@dataclass
class MembershipReport:
    ok: bool
    worst_ratio: list[float]

    def __bool__(self) -> bool:
        return self.ok


def holder_membership(density, beta: float, M: float, J_check: int, rtol: float = 1e-9) -> MembershipReport:
    """Check ``|v_jk| <= M 2^{-dj(beta/d + 1/2)}`` for every wavelet coefficient with j <= J_check."""
    if isinstance(density, GridDensity) and density.L < J_check + 1:
        raise ResolutionError(f"grid at level {density.L} cannot be analyzed to level {J_check}")
    coeffs = coefficients_of(density, J_check)
    ratios = []
    for j in range(J_check + 1):
        worst = float(np.abs(coeffs.wavelet_part(j)).max())
        ratios.append(worst / decay_bound(j, coeffs.d, beta, M))
    return MembershipReport(all(r <= 1 + rtol for r in ratios), ratios)


def sample(density, n: int, seed: int) -> SampleSet:
    """Exact i.i.d. draws: a cell by its mass, then a uniform point inside it."""
    if n < 1:
        raise EmptyInputError("need n >= 1 samples")
    if isinstance(density, WaveletDensity):
        grid = density.to_grid()
        label = f"wavelet-density(J={density.max_level})"
    elif isinstance(density, GridDensity):
        grid = density
        grid.check()
        label = f"grid-density(d={grid.d}, L={grid.L})"
    else:
        raise TypeError(f"unsupported density type {type(density).__name__}")
    rng = np.random.default_rng(seed)
    masses = grid.masses()
    masses = masses / masses.sum()
    side = 2**grid.L
    if grid.n_cells == 1:
        cells = np.zeros((n, grid.d), dtype=np.int64)
    else:
        flat = rng.choice(grid.n_cells, size=n, p=masses)
        cells = np.stack(np.unravel_index(flat, (side,) * grid.d), axis=1)
    pts = (cells + rng.random((n, grid.d))) / side
    pts = np.minimum(pts, np.nextafter(1.0, 0.0))
    return SampleSet(pts, seed=seed, source=label)
