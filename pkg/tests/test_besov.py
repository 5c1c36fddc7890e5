import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from w1minimax.besov import BesovParams, besov_ipm, w1_sandwich
from w1minimax.densities import GridDensity, make_nu_theta, max_tau
from w1minimax.errors import ShapeError
from w1minimax.transport import w1_grid
from w1minimax.wavelet import CoefficientArray, WaveletIndex


def random_coeffs(rng, d, J):
    c = CoefficientArray.zeros(d, J)
    for j in range(J + 1):
        c.levels[j][:] = rng.normal(size=c.levels[j].shape)
    return c


def test_identity_is_zero():
    c = random_coeffs(np.random.default_rng(0), 2, 2)
    for flavor in ("sum", "max"):
        assert besov_ipm(c, c, BesovParams(1.0, flavor, 2)) == 0.0


def test_single_difference():
    u = CoefficientArray.zeros(2, 2)
    v = u.copy()
    v[WaveletIndex(1, (1, 0), (0, 1))] = 0.1
    for flavor in ("sum", "max"):
        assert besov_ipm(u, v, BesovParams(1.0, flavor, 2)) == pytest.approx(0.025, abs=1e-15)


def test_single_level_flavors_agree():
    rng = np.random.default_rng(1)
    u = CoefficientArray.zeros(3, 2)
    v = u.copy()
    v.levels[2][1:] = rng.normal(size=v.levels[2][1:].shape)
    s = besov_ipm(u, v, BesovParams(0.7, "sum", 2))
    m = besov_ipm(u, v, BesovParams(0.7, "max", 2))
    assert abs(s - m) <= 1e-12


def test_shape_errors():
    with pytest.raises(ShapeError):
        besov_ipm(CoefficientArray.zeros(2, 1), CoefficientArray.zeros(1, 1), BesovParams(1.0))
    with pytest.raises(ShapeError):
        besov_ipm(CoefficientArray.zeros(2, 1), CoefficientArray.zeros(2, 1), BesovParams(1.0, "sum", 2))


def test_params_validation():
    with pytest.raises(ValueError):
        BesovParams(1.0, "median")
    with pytest.raises(ValueError):
        BesovParams(float("inf"))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31), d=st.integers(1, 3), gamma=st.floats(0, 2))
def test_metric_properties(seed, d, gamma):
    rng = np.random.default_rng(seed)
    a, b, c = (random_coeffs(rng, d, 2) for _ in range(3))
    for flavor in ("sum", "max"):
        p = BesovParams(gamma, flavor, 2)
        ab, ba = besov_ipm(a, b, p), besov_ipm(b, a, p)
        assert ab == ba and ab >= 0
        assert ab <= besov_ipm(a, c, p) + besov_ipm(c, b, p) + 1e-12
    # sum flavor never decreases when more levels are included
    sums = [besov_ipm(a, b, BesovParams(gamma, "sum", J)) for J in range(3)]
    assert all(x <= y for x, y in zip(sums, sums[1:]))
    assert besov_ipm(a, b, BesovParams(gamma, "max", 2)) <= sums[-1] + 1e-12


class TestSandwich:
    def test_identical(self):
        g = GridDensity.from_masses(2, 2, np.arange(16) + 1.0)
        assert w1_sandwich(g, g, 1) == (0.0, 0.0)

    @pytest.mark.parametrize("d,J,n", [(2, 1, 16), (2, 2, 4096), (3, 1, 512), (1, 3, 1024)])
    def test_nu_theta_single_level(self, d, J, n):
        for beta in (0.5, 1.0):
            tau = max_tau(n, J, beta, d)
            theta = tau * np.where(np.arange(2 ** (d * J)) % 2, 1.0, -1.0)
            nu = make_nu_theta(J, theta, n, d)
            lo, hi = w1_sandwich(GridDensity.uniform(d, J + 1), nu, J)
            assert abs(lo - hi) <= 1e-12
            # saturating amplitude: value (2^{-dJ})^{(beta+1)/d} times mean|theta|/tau
            if tau < math.sqrt(n) * 2 ** (-d * J / 2) * (1 - 1e-6):
                assert hi == pytest.approx(2.0 ** (-J * (beta + 1)), rel=1e-12)
            # general amplitude: 2^{-dJ(1/d+1/2)} sum|theta| / sqrt(n)
            assert hi == pytest.approx(2.0 ** (-d * J * (1 / d + 0.5)) * np.abs(theta).sum() / math.sqrt(n), rel=1e-12)

    def test_two_levels_strict(self):
        c = CoefficientArray.zeros(2, 2)
        c[WaveletIndex(1, (0, 0), (1, 1))] = 0.05
        c[WaveletIndex(2, (3, 3), (1, 0))] = 0.05
        from w1minimax.densities import WaveletDensity

        lo, hi = w1_sandwich(GridDensity.uniform(2, 3), WaveletDensity(c), 2)
        assert lo < hi

    def test_constant_scales_both(self):
        g = make_nu_theta(1, [0.5, -0.5], 4, 1)
        lo, hi = w1_sandwich(GridDensity.uniform(1, 2), g, 1)
        assert w1_sandwich(GridDensity.uniform(1, 2), g, 1, constant=3.0) == pytest.approx((3 * lo, 3 * hi))

    def test_ratio_band_is_level_independent(self):
        rng = np.random.default_rng(2024)
        ratios = {1: [], 2: [], 3: []}
        n = 4096
        for i in range(200):
            J = 1 + i % 3
            theta = rng.uniform(-1, 1, 4**J) * max_tau(n, J, 1.0, 2)
            nu = make_nu_theta(J, theta, n, 2).to_grid(J + 2)
            u = GridDensity.uniform(2, J + 2)
            _, hi = w1_sandwich(u, nu, J)
            ratios[J].append(w1_grid(u, nu).cost / hi)
        allr = np.concatenate([np.array(v) for v in ratios.values()])
        assert allr.max() / allr.min() <= 1.5
