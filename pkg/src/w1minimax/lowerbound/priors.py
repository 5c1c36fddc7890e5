"""Symmetric prior pairs on [-tau, tau] with matched moments and separated |t|-means."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..errors import ConstructionError, LPStatusError
from .simplex import simplex

GAP_TOL = 1e-12


def _exact_moments(atoms, w, order: int) -> list[float]:
    """Moments 0..order computed exactly over the rationals, then rounded once."""
    out = []
    for l in range(order + 1):
        if l % 2:
            out.append(0.0)
            continue
        out.append(float(sum(Fraction(float(p)) * Fraction(float(t)) ** l for t, p in zip(atoms, w))))
    return out


@dataclass
class MomentPriorPair:
    """Two discrete symmetric measures q0, q1 on a common sorted atom grid.

    Orientation: q1 has the larger |t|-mean, so ``gap > 0`` unless degenerate.
    Moments up to ``2K`` are kept from exact arithmetic so that matched moments
    are bitwise equal; higher moments come from the float weights.
    """

    tau: float
    K: int
    atoms: np.ndarray
    w0: np.ndarray
    w1: np.ndarray
    gap: float
    degenerate: bool = False
    exact: bool = False
    lattice: int | None = None  # atoms are tau * i / lattice when set
    _low_moments: tuple = field(default=None, repr=False)

    @classmethod
    def from_weights(cls, atoms, w0, w1, K: int, tau: float | None = None) -> "MomentPriorPair":
        atoms = np.asarray(atoms, dtype=float)
        order = np.argsort(atoms, kind="stable")
        atoms = atoms[order]
        w0 = np.asarray(w0, dtype=float)[order]
        w1 = np.asarray(w1, dtype=float)[order]
        tau = float(np.abs(atoms).max()) if tau is None else float(tau)
        gap = float(np.abs(atoms) @ w1 - np.abs(atoms) @ w0)
        if gap < 0:
            w0, w1, gap = w1, w0, -gap
        low = (_exact_moments(atoms, w0, 2 * K), _exact_moments(atoms, w1, 2 * K))
        return cls(tau, K, atoms, w0, w1, gap, gap <= GAP_TOL, exact=False, _low_moments=low)

    def moment(self, which: int, l: int) -> float:
        if self._low_moments is not None and l <= 2 * self.K:
            return self._low_moments[which][l]
        w = self.w1 if which else self.w0
        return float(w @ self.atoms**l)

    def moments_table(self, order: int | None = None) -> list[dict]:
        order = 2 * self.K if order is None else order
        return [{"order": l, "q0": self.moment(0, l), "q1": self.moment(1, l)} for l in range(order + 1)]

    def abs_mean(self, which: int) -> float:
        w = self.w1 if which else self.w0
        return float(np.abs(self.atoms) @ w)

    def kappa(self) -> float:
        """Measured constant in ``gap = 2 kappa tau / K``."""
        return self.gap * self.K / (2 * self.tau)

    def to_json(self) -> dict:
        return {
            "tau": self.tau,
            "K": self.K,
            "atoms": self.atoms.tolist(),
            "w0": self.w0.tolist(),
            "w1": self.w1.tolist(),
            "gap": self.gap,
            "kappa": self.kappa(),
            "degenerate": self.degenerate,
            "exact": self.exact,
            "moments": self.moments_table(),
        }


def _solve_exact(M: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    n = len(M)
    A = [row[:] + [r] for row, r in zip(M, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            return None
        A[col], A[piv] = A[piv], A[col]
        p = A[col][col]
        A[col] = [v / p for v in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [a - f * c for a, c in zip(A[r], A[col])]
    return [A[r][n] for r in range(n)]


def build_matching_priors(K: int, tau: float, grid_points: int = 401) -> MomentPriorPair:
    """LP-optimal symmetric pair with moments 0..2K matched on an odd grid over [-tau, tau].

    Decision variables are the |t|-distributions rho0, rho1 on {0, 1/H, ..., 1}
    (H = (grid_points - 1) / 2); symmetry puts half of rho(i) on each of +-t_i,
    which makes every odd moment vanish. The LP maximizes
    ``E_{q1}|t| - E_{q0}|t|`` subject to unit mass and equal moments of orders
    2, 4, ..., 2K. The optimal basis is then re-solved over the rationals, so
    the matched moments are exact.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if tau <= 0:
        raise ValueError("tau must be > 0")
    if grid_points < 3 or grid_points % 2 == 0:
        raise ValueError("grid_points must be odd and >= 3")
    H = (grid_points - 1) // 2
    t = np.arange(H + 1) / H
    N = H + 1
    rows = [np.r_[np.ones(N), np.zeros(N)], np.r_[np.zeros(N), np.ones(N)]]
    rows += [np.r_[-(t ** (2 * l)), t ** (2 * l)] for l in range(1, K + 1)]
    A = np.array(rows)
    b = np.r_[1.0, 1.0, np.zeros(K)]
    c = np.r_[-t, t]
    res = simplex(c, A, b, maximize=True)
    if res.status == "iteration-limit":
        raise LPStatusError("prior LP hit the iteration limit")
    if res.status != "optimal":
        raise ConstructionError(f"prior LP is {res.status}")

    # exact re-solve of the optimal basis
    tq = [Fraction(i, H) for i in range(N)]

    def column(j: int) -> list[Fraction]:
        if j < N:
            return [Fraction(1), Fraction(0)] + [-(tq[j] ** (2 * l)) for l in range(1, K + 1)]
        return [Fraction(0), Fraction(1)] + [tq[j - N] ** (2 * l) for l in range(1, K + 1)]

    full_rows = [0, 1] + list(range(2, K + 2))
    M = [[column(j)[r] for j in res.basis] for r in res.rows]
    rhs = [Fraction(1) if r < 2 else Fraction(0) for r in res.rows]
    sol = _solve_exact(M, rhs) if len(M) == len(res.basis) else None
    exact = sol is not None and all(v >= 0 for v in sol)
    if exact:
        rho = [Fraction(0)] * (2 * N)
        for j, v in zip(res.basis, sol):
            rho[j] = v
        # the dropped rows must hold too
        for r in set(full_rows) - set(res.rows):
            lhs = sum(column(j)[r] * rho[j] for j in range(2 * N) if rho[j])
            exact &= lhs == (1 if r < 2 else 0)
    if not exact:
        x = np.clip(res.x, 0, None)
        rho = [Fraction(float(v)) for v in x]
        rho[:N] = [r / sum(rho[:N]) for r in rho[:N]]
        rho[N:] = [r / sum(rho[N:]) for r in rho[N:]]
    rho0, rho1 = rho[:N], rho[N:]

    unit_gap = sum((r1 - r0) * ti for r0, r1, ti in zip(rho0, rho1, tq))
    even = []
    for l in range(2 * K + 1):
        if l % 2:
            even.append((0.0, 0.0))
        else:
            even.append(
                (
                    float(sum(r * ti**l for r, ti in zip(rho0, tq))),
                    float(sum(r * ti**l for r, ti in zip(rho1, tq))),
                )
            )
    low0 = [tau**l * even[l][0] for l in range(2 * K + 1)]
    low1 = [tau**l * even[l][1] for l in range(2 * K + 1)]

    atoms = tau * np.arange(-H, H + 1) / H

    def spread(r):
        half = [float(v / 2) for v in r[1:]]
        return np.array(half[::-1] + [float(r[0])] + half)

    gap = tau * float(unit_gap)
    return MomentPriorPair(
        tau=tau,
        K=K,
        atoms=atoms,
        w0=spread(rho0),
        w1=spread(rho1),
        gap=gap,
        degenerate=gap <= GAP_TOL * max(tau, 1.0),
        exact=exact,
        lattice=H,
        _low_moments=(low0, low1),
    )


def verify_moments(pair: MomentPriorPair, order: int | None = None, tol: float = 1e-8) -> tuple[bool, float]:
    """Compare moments 0..order recomputed from the raw float weights."""
    order = 2 * pair.K if order is None else order
    dev = 0.0
    for l in range(order + 1):
        m0 = math.fsum((pair.w0 * pair.atoms**l).tolist())
        m1 = math.fsum((pair.w1 * pair.atoms**l).tolist())
        dev = max(dev, abs(m0 - m1))
    return dev <= tol, dev
