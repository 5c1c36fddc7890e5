"""Exact Wasserstein-1 ground truth.

* d = 1: closed form ``int |F - G|`` for atomic and piecewise-constant inputs.
* d >= 1 on dyadic grids: transportation problem over cell centers, solved by
  the network simplex of POT (exact, returns dual potentials).
* empirical measures: assignment problem when m == n, transportation otherwise.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .densities import SampleSet
from .errors import DimensionError, ShapeError, SizeError
from .grid import GridDensity

for _backend in ("PYTORCH", "TENSORFLOW", "JAX", "CUPY"):
    os.environ.setdefault(f"POT_BACKEND_DISABLE_{_backend}", "1")
import ot  # noqa: E402

DEFAULT_CELL_CAP = 4096
DEFAULT_ARC_CAP = 4096 * 4096
WEIGHT_TOL = 1e-12


@dataclass
class DiscreteMeasure:
    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.support = np.asarray(self.support, dtype=float)
        if self.support.ndim == 1:
            self.support = self.support[:, None]
        self.weights = np.asarray(self.weights, dtype=float)
        if len(self.weights) != len(self.support):
            raise ShapeError("support and weights differ in length")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1) > WEIGHT_TOL:
            raise ValueError("weights must be nonnegative and sum to 1")

    @property
    def d(self) -> int:
        return self.support.shape[1]

    @classmethod
    def from_samples(cls, samples) -> "DiscreteMeasure":
        pts = np.asarray(getattr(samples, "points", samples), dtype=float)
        uniq, counts = np.unique(pts, axis=0, return_counts=True)
        return cls(uniq, counts / counts.sum())

    @classmethod
    def from_grid(cls, grid: GridDensity, drop_zero: bool = True) -> "DiscreteMeasure":
        m = grid.masses()
        pts = grid.cell_centers()
        if drop_zero:
            keep = m > 0
            pts, m = pts[keep], m[keep]
        return cls(pts, m / m.sum())


@dataclass
class TransportSolution:
    cost: float
    flow: list = field(default_factory=list, repr=False)  # (source, target, mass)
    status: str = "optimal"
    dual_gap: float = 0.0

    def flow_array(self) -> np.ndarray:
        return np.array(self.flow, dtype=float).reshape(-1, 3)


# ---------------------------------------------------------------- 1D closed form


def _cdf_pieces(m):
    """Breakpoints plus a right-continuous CDF evaluator for a 1D measure."""
    if isinstance(m, GridDensity):
        if m.d != 1:
            raise DimensionError(f"w1_1d needs d = 1, got {m.d}")
        edges = np.arange(2**m.L + 1) / 2**m.L
        cum = np.concatenate([[0.0], np.cumsum(m.masses())])

        def cdf(x, left=False):
            return np.interp(x, edges, cum)

        return edges, cdf
    if isinstance(m, SampleSet):
        m = DiscreteMeasure.from_samples(m)
    if isinstance(m, DiscreteMeasure):
        if m.d != 1:
            raise DimensionError(f"w1_1d needs d = 1, got {m.d}")
        order = np.argsort(m.support[:, 0], kind="stable")
        xs = m.support[order, 0]
        cum = np.cumsum(m.weights[order])

        def cdf(x, left=False):
            side = "left" if left else "right"
            k = np.searchsorted(xs, x, side=side)
            return np.where(k > 0, cum[np.maximum(k - 1, 0)], 0.0)

        return xs, cdf
    raise TypeError(f"unsupported measure type {type(m).__name__}")


def w1_1d(mu, nu) -> float:
    """``int |F - G| dx``, exact for atoms and piecewise-constant densities."""
    bm, F = _cdf_pieces(mu)
    bn, G = _cdf_pieces(nu)
    pts = np.unique(np.concatenate([bm, bn, [0.0, 1.0]]))
    a, b = pts[:-1], pts[1:]
    # F - G is affine on each open piece: right limit at a, left limit at b
    lo = F(a) - G(a)
    hi = F(b, left=True) - G(b, left=True)
    h = b - a
    same = lo * hi >= 0
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = np.where(same, 0.0, (lo**2 + hi**2) / (2 * np.abs(lo - hi)))
    piece = np.where(same, (np.abs(lo) + np.abs(hi)) / 2, cross) * h
    return math.fsum(piece.tolist())


# ---------------------------------------------------------------- transportation


def _emd(a: np.ndarray, b: np.ndarray, cost: np.ndarray):
    plan, log = ot.emd(a, b, cost, numItermax=10_000_000, log=True)
    status = "optimal" if log.get("result_code", 1) == 1 else "iteration-limit"
    primal = math.fsum((plan * cost).ravel().tolist())
    dual = math.fsum((a * log["u"]).tolist()) + math.fsum((b * log["v"]).tolist())
    return plan, primal, abs(primal - dual), status


def w1_discrete(mu: DiscreteMeasure, nu: DiscreteMeasure, arc_cap: int = DEFAULT_ARC_CAP) -> TransportSolution:
    if mu.d != nu.d:
        raise DimensionError(f"dimension mismatch {mu.d} vs {nu.d}")
    if len(mu.weights) * len(nu.weights) > arc_cap:
        raise SizeError(f"{len(mu.weights)}x{len(nu.weights)} arcs exceed cap {arc_cap}")
    cost = cdist(mu.support, nu.support)
    plan, primal, gap, status = _emd(mu.weights, nu.weights, cost)
    rows, cols = np.nonzero(plan)
    flow = [(int(i), int(j), float(plan[i, j])) for i, j in zip(rows, cols)]
    return TransportSolution(primal, flow, status, gap)


def _canonical(mu: GridDensity, nu: GridDensity) -> bool:
    """True when (mu, nu) is already in canonical order; makes the solve order-free."""
    a, b = mu.values.ravel(), nu.values.ravel()
    diff = np.nonzero(a != b)[0]
    return bool(a[diff[0]] > b[diff[0]])


def w1_grid(mu: GridDensity, nu: GridDensity, cell_cap: int = DEFAULT_CELL_CAP) -> TransportSolution:
    """Exact W1 between the cell-center discretizations of two grid densities.

    Only the excess ``(mu - nu)^+`` is routed to the deficit ``(mu - nu)^-``; the
    shared mass ``min(mu, nu)`` stays in place and is reported as diagonal flow.
    """
    if mu.d != nu.d or mu.L != nu.L:
        raise ShapeError(f"grids differ: (d={mu.d}, L={mu.L}) vs (d={nu.d}, L={nu.L})")
    if mu.n_cells > cell_cap:
        raise SizeError(f"{mu.n_cells} cells exceed cap {cell_cap}")
    if np.array_equal(mu.values, nu.values):
        return TransportSolution(0.0, [], "optimal", 0.0)
    if not _canonical(mu, nu):
        sol = w1_grid(nu, mu, cell_cap)
        sol.flow = [(j, i, m) for i, j, m in sol.flow]
        return sol
    a, b = mu.masses(), nu.masses()
    excess = a - b
    src = np.nonzero(excess > 0)[0]
    dst = np.nonzero(excess < 0)[0]
    centers = mu.cell_centers()
    pa, pb = excess[src], -excess[dst]
    total = pa.sum()
    # equal totals up to rounding; normalize both for the solver and rescale
    plan, primal, gap, status = _emd(pa / total, pb / pb.sum(), cdist(centers[src], centers[dst]))
    plan = plan * total
    rows, cols = np.nonzero(plan)
    flow = [(int(src[i]), int(dst[j]), float(plan[i, j])) for i, j in zip(rows, cols)]
    shared = np.minimum(a, b)
    flow += [(int(k), int(k), float(shared[k])) for k in np.nonzero(shared > 0)[0]]
    return TransportSolution(primal * total, flow, status, gap * total)


def w1_empirical(X, Y, arc_cap: int = DEFAULT_ARC_CAP) -> float:
    """Exact W1 between the empirical measures of two sample sets."""
    x = np.asarray(getattr(X, "points", X), dtype=float)
    y = np.asarray(getattr(Y, "points", Y), dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if y.ndim == 1:
        y = y[:, None]
    if x.shape[1] != y.shape[1]:
        raise DimensionError(f"dimension mismatch {x.shape[1]} vs {y.shape[1]}")
    if len(x) * len(y) > arc_cap:
        raise SizeError(f"{len(x)}x{len(y)} arcs exceed cap {arc_cap}")
    cost = cdist(x, y)
    if len(x) == len(y):
        # equal uniform atoms: an optimal coupling is a permutation
        r, c = linear_sum_assignment(cost)
        return math.fsum(cost[r, c].tolist()) / len(x)
    a = np.full(len(x), 1 / len(x))
    b = np.full(len(y), 1 / len(y))
    _, primal, _, _ = _emd(a, b, cost)
    return primal
