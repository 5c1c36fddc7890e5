"""Piecewise-constant functions on the dyadic grid of [0,1)^d."""
from __future__ import annotations

import json
from dataclasses import InitVar, dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidDensityError, ShapeError

MASS_TOL = 1e-12


@dataclass
class GridDensity:
    """Cell values on the 2^L x ... x 2^L grid of [0,1)^d.

    ``values[k_0, ..., k_{d-1}]`` is the density on the cell
    prod_i [k_i 2^-L, (k_i + 1) 2^-L). With ``validate=False`` the values may
    be an arbitrary signed grid function (used for synthesis of raw
    coefficient arrays).
    """

    d: int
    L: int
    values: np.ndarray = field(repr=False)
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool) -> None:
        self.values = np.asarray(self.values, dtype=float)
        shape = (2**self.L,) * self.d
        if self.values.size != 2 ** (self.d * self.L):
            raise ShapeError(f"expected {2 ** (self.d * self.L)} cell values, got {self.values.size}")
        self.values = self.values.reshape(shape)
        if validate:
            self.check()

    def check(self) -> None:
        if not np.all(np.isfinite(self.values)):
            raise InvalidDensityError("non-finite density values")
        if self.values.min() < 0:
            raise InvalidDensityError(f"negative density value {self.values.min():.3g}")
        if abs(self.values.mean() - 1.0) > MASS_TOL:
            raise InvalidDensityError(f"total mass {self.values.mean():.15g} != 1")

    @classmethod
    def uniform(cls, d: int, L: int = 0) -> "GridDensity":
        return cls(d, L, np.ones((2**L,) * d))

    @classmethod
    def from_masses(cls, d: int, L: int, masses) -> "GridDensity":
        masses = np.asarray(masses, dtype=float)
        return cls(d, L, masses / masses.sum() * 2 ** (d * L))

    @property
    def n_cells(self) -> int:
        return self.values.size

    def masses(self) -> np.ndarray:
        """Cell masses, flattened in row-major cell order."""
        return self.values.ravel() / self.n_cells

    def cell_centers(self) -> np.ndarray:
        side = (np.arange(2**self.L) + 0.5) / 2**self.L
        mesh = np.meshgrid(*([side] * self.d), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def refine(self, L: int) -> "GridDensity":
        """Same function represented on a finer grid."""
        if L < self.L:
            raise ShapeError(f"cannot refine level {self.L} down to {L}")
        v = self.values
        for axis in range(self.d):
            v = np.repeat(v, 2 ** (L - self.L), axis=axis)
        return GridDensity(self.d, L, v, validate=False)

    def to_json(self) -> dict:
        return {"d": self.d, "L": self.L, "values": self.values.ravel().tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "GridDensity":
        return cls(int(obj["d"]), int(obj["L"]), np.asarray(obj["values"], dtype=float))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def load(cls, path) -> "GridDensity":
        return cls.from_json(json.loads(Path(path).read_text()))
