"""Tensor Haar multiresolution analysis on [0,1]^d.

Atoms are indexed by ``(level j, cell k, orientation eps)``. For ``eps != 0``
the atom is ``prod_i g_i(x_i)`` with ``g_i = 2^{j/2} psi(2^j x_i - k_i)`` when
``eps_i = 1`` and ``2^{j/2} 1[cell]`` when ``eps_i = 0``; ``psi`` is +1 on the
left half of [0,1) and -1 on the right half. The single atom with ``eps = 0``
lives at ``j = 0`` and is the constant function 1.

A :class:`CoefficientArray` stores level ``j`` densely as an array of shape
``(2^d,) + (2^j,)*d`` indexed ``[orientation_code, k_0, ..., k_{d-1}]`` with
``orientation_code = sum_i eps_i 2^i``. Slot 0 holds the scaling coefficient
at ``j = 0`` and is identically zero for ``j >= 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyInputError, InvalidIndexError, ResolutionError, ShapeError
from .grid import GridDensity


def orientation_code(eps) -> int:
    return int(sum(int(e) << i for i, e in enumerate(eps)))


def orientation_bits(code: int, d: int) -> tuple[int, ...]:
    return tuple((code >> i) & 1 for i in range(d))


@dataclass(frozen=True)
class WaveletIndex:
    level: int
    cell: tuple[int, ...]
    orientation: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "cell", tuple(int(c) for c in self.cell))
        object.__setattr__(self, "orientation", tuple(int(e) for e in self.orientation))
        self.check()

    @property
    def d(self) -> int:
        return len(self.cell)

    @property
    def code(self) -> int:
        return orientation_code(self.orientation)

    @property
    def is_scaling(self) -> bool:
        return self.code == 0

    def check(self) -> None:
        j = self.level
        if j < 0:
            raise InvalidIndexError(f"negative level {j}")
        if len(self.orientation) != len(self.cell) or not self.cell:
            raise InvalidIndexError("cell and orientation must share a positive dimension")
        if any(e not in (0, 1) for e in self.orientation):
            raise InvalidIndexError(f"orientation entries must be 0/1: {self.orientation}")
        if any(not 0 <= k < 2**j for k in self.cell):
            raise InvalidIndexError(f"cell {self.cell} out of range for level {j}")
        if self.code == 0 and j != 0:
            raise InvalidIndexError("orientation 0 is only allowed at level 0")

    @classmethod
    def scaling(cls, d: int) -> "WaveletIndex":
        return cls(0, (0,) * d, (0,) * d)

    @classmethod
    def diagonal(cls, level: int, cell) -> "WaveletIndex":
        """Atom with orientation (1, ..., 1), the one used by perturbation families."""
        cell = tuple(cell)
        return cls(level, cell, (1,) * len(cell))


def _check_points(x: np.ndarray, d: int | None = None) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if d is not None and x.shape[1] != d:
        raise ShapeError(f"points have dimension {x.shape[1]}, expected {d}")
    if np.any(x < 0) or np.any(x >= 1):
        raise ValueError("points must lie in [0,1)^d")
    return x


def haar_eval(idx: WaveletIndex, x) -> np.ndarray | float:
    """Evaluate atom ``idx`` at one point (shape (d,)) or many (shape (n, d))."""
    single = np.ndim(x) == 1
    pts = _check_points(x, idx.d)
    j = idx.level
    scaled = pts * 2**j
    inside = np.all(np.floor(scaled).astype(np.int64) == np.asarray(idx.cell), axis=1)
    frac = scaled - np.floor(scaled)
    val = np.full(len(pts), 2.0 ** (idx.d * j / 2))
    for i, e in enumerate(idx.orientation):
        if e:
            val *= np.where(frac[:, i] < 0.5, 1.0, -1.0)
    val = np.where(inside, val, 0.0)
    return float(val[0]) if single else val


@dataclass
class CoefficientArray:
    """Dense Haar coefficients for all levels ``0..max_level``."""

    d: int
    levels: list = field(repr=False)

    def __post_init__(self):
        self.levels = [np.asarray(a, dtype=float) for a in self.levels]
        if not self.levels:
            raise ShapeError("coefficient array needs at least level 0")
        for j, a in enumerate(self.levels):
            if a.shape != (2**self.d,) + (2**j,) * self.d:
                raise ShapeError(f"level {j} has shape {a.shape}")

    @classmethod
    def zeros(cls, d: int, J: int) -> "CoefficientArray":
        return cls(d, [np.zeros((2**d,) + (2**j,) * d) for j in range(J + 1)])

    @property
    def max_level(self) -> int:
        return len(self.levels) - 1

    @property
    def scaling(self) -> float:
        return float(self.levels[0].flat[0])

    def __getitem__(self, idx: WaveletIndex) -> float:
        if idx.d != self.d or idx.level > self.max_level:
            raise InvalidIndexError(f"{idx} not in array of dimension {self.d}, level {self.max_level}")
        return float(self.levels[idx.level][(idx.code,) + idx.cell])

    def __setitem__(self, idx: WaveletIndex, value: float) -> None:
        if idx.d != self.d or idx.level > self.max_level:
            raise InvalidIndexError(f"{idx} not in array of dimension {self.d}, level {self.max_level}")
        self.levels[idx.level][(idx.code,) + idx.cell] = value

    def copy(self) -> "CoefficientArray":
        return CoefficientArray(self.d, [a.copy() for a in self.levels])

    def resized(self, J: int) -> "CoefficientArray":
        """Truncate to, or zero-pad up to, level J."""
        out = CoefficientArray.zeros(self.d, J)
        for j in range(min(J, self.max_level) + 1):
            out.levels[j][...] = self.levels[j]
        return out

    def wavelet_part(self, j: int) -> np.ndarray:
        """Level-j wavelet coefficients (orientations 1..2^d-1)."""
        return self.levels[j][1:]

    def __add__(self, other: "CoefficientArray") -> "CoefficientArray":
        J = max(self.max_level, other.max_level)
        a, b = self.resized(J), other.resized(J)
        return CoefficientArray(self.d, [x + y for x, y in zip(a.levels, b.levels)])

    def __sub__(self, other: "CoefficientArray") -> "CoefficientArray":
        J = max(self.max_level, other.max_level)
        a, b = self.resized(J), other.resized(J)
        return CoefficientArray(self.d, [x - y for x, y in zip(a.levels, b.levels)])

    def sq_norm(self) -> float:
        return float(sum((a**2).sum() for a in self.levels))

    def allclose(self, other: "CoefficientArray", atol: float = 1e-12) -> bool:
        if self.d != other.d or self.max_level != other.max_level:
            return False
        return all(np.allclose(a, b, rtol=0, atol=atol) for a, b in zip(self.levels, other.levels))


def empirical_coeffs(samples, J: int) -> CoefficientArray:
    """Sample means of every atom up to level J.

    ``samples`` is a SampleSet or an (n, d) array of points in [0,1)^d.
    """
    pts = getattr(samples, "points", samples)
    pts = np.asarray(pts, dtype=float)
    if pts.ndim != 2 or len(pts) == 0:
        raise EmptyInputError("empirical coefficients need at least one sample")
    pts = _check_points(pts)
    n, d = pts.shape
    out = CoefficientArray.zeros(d, J)
    for j in range(J + 1):
        cells = np.floor(pts * 2**j).astype(np.int64)
        sign = np.where(np.floor(pts * 2 ** (j + 1)).astype(np.int64) % 2 == 0, 1.0, -1.0)
        flat = np.ravel_multi_index(tuple(cells.T), (2**j,) * d)
        scale = 2.0 ** (d * j / 2)
        for code in range(1, 2**d):
            val = np.full(n, scale)
            for i in range(d):
                if (code >> i) & 1:
                    val = val * sign[:, i]
            sums = np.bincount(flat, weights=val, minlength=2 ** (d * j))
            out.levels[j][code] = (sums / n).reshape((2**j,) * d)
    out.levels[0].flat[0] = 1.0
    return out


def _split(c: np.ndarray) -> np.ndarray:
    """One analysis step on cell averages: level j+1 -> 2^d band averages at level j.

    Halving is exact in binary, so a constant input keeps its value bitwise.
    """
    d = c.ndim
    bands = {0: c}
    for axis in range(d):
        nxt = {}
        for code, b in bands.items():
            even = np.take(b, np.arange(0, b.shape[axis], 2), axis=axis)
            odd = np.take(b, np.arange(1, b.shape[axis], 2), axis=axis)
            nxt[code] = (even + odd) / 2
            nxt[code | (1 << axis)] = (even - odd) / 2
        bands = nxt
    return np.stack([bands[code] for code in range(2**d)])


def _merge(bands: np.ndarray) -> np.ndarray:
    """Inverse of :func:`_split`."""
    d = bands.ndim - 1
    cur = {code: bands[code] for code in range(2**d)}
    for axis in reversed(range(d)):
        nxt = {}
        for code in cur:
            if code & (1 << axis):
                continue
            low, high = cur[code], cur[code | (1 << axis)]
            shape = list(low.shape)
            shape[axis] *= 2
            out = np.empty(shape)
            sl_even = [slice(None)] * d
            sl_odd = [slice(None)] * d
            sl_even[axis] = slice(0, None, 2)
            sl_odd[axis] = slice(1, None, 2)
            out[tuple(sl_even)] = low + high
            out[tuple(sl_odd)] = low - high
            nxt[code] = out
        cur = nxt
    return cur[0]


def analyze(density: GridDensity, J: int) -> CoefficientArray:
    """Exact inner products of a piecewise-constant function with all atoms up to level J."""
    L, d = density.L, density.d
    if L < J + 1:
        raise ResolutionError(f"resolution {L} too coarse to analyze level {J} (need {J + 1})")
    c = density.values
    levels = [None] * L
    for j in range(L - 1, -1, -1):
        bands = _split(c)
        c = bands[0].copy()
        # <f, h_jk> = 2^{-dj/2} * (signed average over the cell)
        bands *= 2.0 ** (-d * j / 2)
        if j:
            bands[0] = 0.0
        levels[j] = bands
    return CoefficientArray(d, levels[: J + 1])


def synthesize(coeffs: CoefficientArray, L: int) -> GridDensity:
    """Grid values at resolution L of the finite expansion ``sum coeff * atom``."""
    J, d = coeffs.max_level, coeffs.d
    if L < J + 1:
        raise ResolutionError(f"resolution {L} too coarse to synthesize level {J} (need {J + 1})")
    c = coeffs.levels[0][0]
    for j in range(J + 1):
        bands = coeffs.levels[j] * 2.0 ** (d * j / 2)
        bands[0] = c
        c = _merge(bands)
    return GridDensity(d, J + 1, c, validate=False).refine(L)
