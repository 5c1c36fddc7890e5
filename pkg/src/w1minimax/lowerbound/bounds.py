"""Total-variation bounds, separation and Le Cam assembly for the nu_theta mixtures.

Under hypothesis i the sample of size n comes from ``nu_theta`` with
``theta_k ~ q_i`` i.i.d. over the ``C = 2^{dJ}`` cells. On the two halves of
cell k the density is ``1 +- theta_k s`` with ``s = 2^{dJ/2} / sqrt(n)``; every
cell has mass ``p = 2^{-dJ}`` under every theta.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import gammaln
from scipy.stats import binom

from ..densities import max_tau
from ..errors import SizeError
from ..estimators import choose_J, rate
from .priors import MomentPriorPair, build_matching_priors

BRUTE_FORCE_CAP = 10**6
EXACT_TELESCOPE_N = 1000
TAIL_LEVEL = 1e-17
EXACT_DELTA_CELLS = 12
TAU_RTOL = 1e-12


@dataclass(frozen=True)
class HypothesisPair:
    J: int
    n: int
    priors: MomentPriorPair
    beta: float
    d: int

    def __post_init__(self):
        if self.n < 1 or self.J < 0 or self.d < 1:
            raise ValueError("need n >= 1, J >= 0, d >= 1")
        bound = max_tau(self.n, self.J, self.beta, self.d)
        if self.priors.tau > bound * (1 + TAU_RTOL):
            raise ValueError(f"tau={self.priors.tau} exceeds max_tau={bound}")

    @property
    def cells(self) -> int:
        return 2 ** (self.d * self.J)

    @property
    def scale(self) -> float:
        """Half-cell density offset per unit theta."""
        return 2.0 ** (self.d * self.J / 2) / math.sqrt(self.n)

    @property
    def cell_mass(self) -> float:
        return 2.0 ** (-self.d * self.J)


def _log_comb(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


# ---------------------------------------------------------------- l2 route


def l2_tv_bound(pair: MomentPriorPair, n: int) -> tuple[float, float]:
    """(exact_sum, closed_form) for the single-cell chi-square type sum.

    exact_sum = sum_{l=K+1}^{floor(n/2)} (m_{2l}(q1) - m_{2l}(q0))^2 C(n,2l) / n^{2l}
    closed_form = 4 tau^{4K} / (2K)! * exp(tau^4)
    """
    K, tau = pair.K, pair.tau
    closed = 4 * tau ** (4 * K) / math.factorial(2 * K) * math.exp(tau**4)
    u = pair.atoms / tau
    dw = pair.w1 - pair.w0
    terms = []
    for l in range(K + 1, n // 2 + 1):
        dm = math.fsum((dw * u ** (2 * l)).tolist())
        if dm == 0.0:
            continue
        logt = _log_comb(n, 2 * l) - 2 * l * math.log(n) + 4 * l * math.log(tau) + 2 * math.log(abs(dm))
        terms.append(math.exp(logt))
    return math.fsum(terms), closed


# ---------------------------------------------------------------- exact TV


def _poly_coeffs(a: int, b: int) -> list[int]:
    """Integer coefficients of (1+x)^a (1-x)^b."""
    plus = [math.comb(a, i) for i in range(a + 1)]
    minus = [math.comb(b, i) * (-1) ** i for i in range(b + 1)]
    out = [0] * (a + b + 1)
    for i, x in enumerate(plus):
        for j, y in enumerate(minus):
            out[i + j] += x * y
    return out


def exact_tv_bruteforce(hyp: HypothesisPair) -> float:
    """TV between the two mixtures by enumerating every signed half-cell assignment.

    Each per-cell prior average is expanded in moments, so moments matched
    bitwise yield bitwise-identical likelihoods.
    """
    C, n = hyp.cells, hyp.n
    if n * math.log(2 * C) > math.log(BRUTE_FORCE_CAP) + 1e-9:
        raise SizeError(f"(2*{C})^{n} outcomes exceed cap {BRUTE_FORCE_CAP}")
    pair, s = hyp.priors, hyp.scale
    mom = [[pair.moment(w, l) for l in range(n + 1)] for w in (0, 1)]
    cache: dict = {}

    def factor(ab):
        if ab not in cache:
            c = _poly_coeffs(*ab)
            cache[ab] = tuple(math.fsum(ci * s**l * mom[w][l] for l, ci in enumerate(c)) for w in (0, 1))
        return cache[ab]

    region = (hyp.cell_mass / 2) ** n
    diffs = []
    for outcome in itertools.product(range(2 * C), repeat=n):
        counts: dict = {}
        for h in outcome:
            k, sign = divmod(h, 2)
            a, b = counts.get(k, (0, 0))
            counts[k] = (a + 1, b) if sign == 0 else (a, b + 1)
        p0 = p1 = 1.0
        for ab in sorted(counts.values()):
            f0, f1 = factor(ab)
            p0 *= f0
            p1 *= f1
        diffs.append(abs(p0 - p1) * region)
    return 0.5 * math.fsum(diffs)


# ---------------------------------------------------------------- telescope


def telescope_terms(hyp: HypothesisPair) -> dict:
    """Per-cell integral ``int |E_q1 f_k - E_q0 f_k|`` under the uniform base.

    Enumerates (count in the cell, count in its positive half). Counts up to
    2K+1 contribute exactly 0: the integrand is then a polynomial of degree at
    most 2K+1 in theta, whose even moments are matched and odd moments vanish.
    For n above
    the exact threshold the count is truncated at a binomial tail and the
    rigorous remainder ``2 P(N > N_max)`` is added.
    """
    pair, n, s, p = hyp.priors, hyp.n, hyp.scale, hyp.cell_mass
    dw = pair.w1 - pair.w0
    live = dw != 0
    x = pair.atoms[live] * s
    dw = dw[live]
    lp, lm = np.log1p(x), np.log1p(-x)
    if n <= EXACT_TELESCOPE_N or p == 1.0:
        n_max, tail = n, 0.0
    else:
        # binom.isf saturates below ~1e-16, so locate the cut on the survival function
        sf = binom.sf(np.arange(n + 1), n, p)
        n_max = int(np.argmax(sf <= TAIL_LEVEL))
        tail = 2.0 * float(sf[n_max])
    pieces = []
    for N in range(n_max + 1):
        wN = binom.pmf(N, n, p) if p < 1.0 else float(N == n)
        if wN == 0.0 or N <= 2 * pair.K + 1:
            continue
        a = np.arange(N + 1)
        log_a = _log_comb(N, a) - N * math.log(2)
        expo = log_a[:, None] + a[:, None] * lp[None, :] + (N - a)[:, None] * lm[None, :]
        delta = np.exp(expo) @ dw
        pieces.append(wN * math.fsum(np.abs(delta).tolist()))
    per_cell = math.fsum(pieces) + tail
    return {"per_cell": per_cell, "cells": hyp.cells, "tail": tail, "n_max": n_max}


def telescope_bound(hyp: HypothesisPair) -> float:
    """Upper bound on ``2 TV`` as a sum of identical per-cell terms."""
    t = telescope_terms(hyp)
    return t["cells"] * t["per_cell"]


# ---------------------------------------------------------------- functional


def functional_scale(hyp: HypothesisPair, gamma: float = 1.0) -> float:
    """F(theta) = functional_scale * mean_k |theta_k| for the sum surrogate at gamma."""
    dJ = hyp.d * hyp.J
    return 2.0 ** (-dJ * (gamma / hyp.d + 0.5)) * 2.0**dJ / math.sqrt(hyp.n)


def separation(hyp: HypothesisPair, gamma: float = 1.0) -> float:
    return functional_scale(hyp, gamma) * hyp.priors.gap


@dataclass
class DeltaEstimate:
    value: float
    std_error: float
    method: str  # enumeration | lattice | monte-carlo


def delta_Q(hyp: HypothesisPair, which: int, gamma: float = 1.0, mc_draws: int = 200_000, seed: int = 0) -> DeltaEstimate:
    """``E_{theta ~ Q} |F(theta) - E F(theta)|`` with ``Q = q_which`` over all cells."""
    pair = hyp.priors
    w = pair.w1 if which else pair.w0
    C = hyp.cells
    # distribution of |theta| for one cell
    mags, inv = np.unique(np.abs(pair.atoms), return_inverse=True)
    rho = np.bincount(inv, weights=w, minlength=len(mags))
    keep = rho > 0
    mags, rho = mags[keep], rho[keep]
    scale = functional_scale(hyp, gamma)
    mean_abs = float(rho @ mags)

    if len(mags) == 1:
        return DeltaEstimate(0.0, 0.0, "enumeration")
    if C <= EXACT_DELTA_CELLS and len(mags) ** C <= BRUTE_FORCE_CAP:
        terms = []
        for combo in itertools.product(range(len(mags)), repeat=C):
            prob = math.prod(rho[i] for i in combo)
            m = math.fsum(mags[i] for i in combo) / C
            terms.append(prob * abs(m - mean_abs))
        return DeltaEstimate(scale * math.fsum(terms), 0.0, "enumeration")
    H = pair.lattice
    if H is not None:
        # |theta| = tau * i / H, so the cell sum lives on an integer lattice
        idx = np.rint(mags * H / pair.tau).astype(int)
        base = np.zeros(idx.max() + 1)
        np.add.at(base, idx, rho)
        dist = _convolution_power(base, C)
        support = np.arange(len(dist)) * pair.tau / (H * C)
        dev = math.fsum((dist * np.abs(support - mean_abs)).tolist())
        return DeltaEstimate(scale * dev, 0.0, "lattice")
    rng = np.random.default_rng(seed)
    draws = rng.choice(mags, size=(mc_draws, C), p=rho / rho.sum())
    dev = np.abs(draws.mean(axis=1) - mean_abs)
    return DeltaEstimate(scale * float(dev.mean()), scale * float(dev.std(ddof=1) / math.sqrt(mc_draws)), "monte-carlo")


def _convolution_power(base: np.ndarray, power: int) -> np.ndarray:
    result = np.array([1.0])
    sq = base
    while power:
        if power & 1:
            result = np.clip(fftconvolve(result, sq), 0, None)
        power >>= 1
        if power:
            sq = np.clip(fftconvolve(sq, sq), 0, None)
    return result / result.sum()


# ---------------------------------------------------------------- Le Cam


def lecam_risk_lb(sep: float, tv: float, delta0: float, delta1: float) -> tuple[float, bool]:
    """``sep/4 (1 - tv) - (delta0 + delta1)/2`` floored at 0, plus a flag set when the floor binds."""
    if not 0.0 <= tv <= 1.0:
        raise ValueError("tv must lie in [0, 1]")
    if sep < 0 or delta0 < 0 or delta1 < 0:
        raise ValueError("sep and deltas must be >= 0")
    raw = sep / 4 * (1 - tv) - (delta0 + delta1) / 2
    return max(0.0, raw), raw <= 0


def calibrate_K(n: int, c: float) -> int:
    return max(1, int(round(c / 2 * math.log(n) / math.log(math.log(n)))))


def verify_lower_bound(
    n: int,
    d: int,
    beta: float,
    J: int | None = None,
    c: float = 0.5,
    level_offset: int = 1,
    grid_points: int = 401,
) -> dict:
    """Build the hypothesis pair at (n, d, beta) and report every bound."""
    if J is None:
        J = choose_J(n, beta, d) + level_offset
    K = calibrate_K(n, c)
    tau = max_tau(n, J, beta, d)
    grid_points = max(grid_points, 4 * K + 3)
    pair = build_matching_priors(K, tau, grid_points)
    hyp = HypothesisPair(J, n, pair, beta, d)
    exact_sum, closed = l2_tv_bound(pair, n)
    tele = telescope_terms(hyp)
    telescope = tele["cells"] * tele["per_cell"]
    try:
        exact_tv = exact_tv_bruteforce(hyp)
    except SizeError:
        exact_tv = None
    tv = min(1.0, telescope / 2)
    sep = separation(hyp)
    d0, d1 = delta_Q(hyp, 0), delta_Q(hyp, 1)
    value, dominated = lecam_risk_lb(sep, tv, d0.value, d1.value)
    reference = rate(n, beta, d, lower=True)
    return {
        "n": n,
        "d": d,
        "beta": beta,
        "J": J,
        "K": K,
        "c": c,
        "tau": tau,
        "gap": pair.gap,
        "kappa": pair.kappa(),
        "exact_tv": exact_tv,
        "telescope": telescope,
        "telescope_tail": tele["tail"],
        "l2_exact_sum": exact_sum,
        "l2_closed_form": closed,
        "l2_bound": hyp.cells * math.sqrt(exact_sum),
        "tv": tv,
        "separation": sep,
        "delta0": d0.value,
        "delta1": d1.value,
        "delta_method": d0.method,
        "delta_std_error": [d0.std_error, d1.std_error],
        "lecam": value,
        "dominated": dominated,
        "reference_rate": reference,
        "ratio": value / reference,
    }
