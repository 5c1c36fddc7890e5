import math

import numpy as np
import pytest

from w1minimax.besov import BesovParams, besov_ipm
from w1minimax.densities import GridDensity, make_nu_theta, max_tau, sample
from w1minimax.estimators import (
    EstimatorConfig,
    bias_bound,
    choose_J,
    plugin_empirical,
    plugin_smoothed,
    rate,
    rate_exponent,
    smoothed_density,
    smoothed_estimate,
    stochastic_bound,
)
from w1minimax.transport import w1_1d
from w1minimax.wavelet import CoefficientArray, empirical_coeffs


def uniform_pair(n, d, seed):
    g = GridDensity.uniform(d, 0)
    return sample(g, n, 2 * seed), sample(g, n, 2 * seed + 1)


class TestFormulas:
    def test_choose_J(self):
        assert choose_J(1024, 1.0, 2) == 2
        assert choose_J(10**9, float("inf"), 2) == 0
        assert choose_J(2, 0.0, 2) == 0
        with pytest.raises(ValueError):
            choose_J(1, 1.0, 2)

    def test_choose_J_inequality(self):
        for n in [2, 5, 64, 1000, 4096, 10**6]:
            for d in (1, 2, 3):
                for beta in (0.25, 0.5, 1.0):
                    J = choose_J(n, beta, d)
                    target = n ** (d / (2 * beta + d))
                    assert 2 ** (d * J) <= target * (1 + 1e-9)
                    assert 2 ** (d * (J + 1)) > target * (1 - 1e-9)

    def test_rate(self):
        assert rate(1024, 1.0, 2) == 0.03125
        assert rate_exponent(1.0, 3) == pytest.approx(0.4)
        for beta in (0.1, 0.5, 1.0, 3.0):
            assert rate_exponent(beta, 2) == 0.5
        assert rate(1024, 1.0, 2, lower=True) == pytest.approx(0.03125 * math.log(math.log(1024)) / math.log(1024))
        with pytest.raises(ValueError):
            rate(2, 1.0, 2)

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_balancing(self, d):
        for n in [2**k for k in range(6, 21)]:
            J = choose_J(n, 1.0, d)
            ratio = bias_bound(J, 1.0, d) / stochastic_bound(n, J, d)
            assert 2.0**-d <= ratio <= 2.0**d


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            EstimatorConfig(1.0, backend="sinkhorn")
        with pytest.raises(ValueError):
            EstimatorConfig(-0.1)
        with pytest.raises(ValueError):
            EstimatorConfig(1.0, J=-1)


class TestEmpirical:
    def test_order_of_magnitude_and_trend(self):
        means = []
        for n in (64, 256, 1024):
            means.append(np.mean([plugin_empirical(*uniform_pair(n, 2, s)) for s in range(10)]))
        assert all(a > b for a, b in zip(means, means[1:]))
        assert 0.2 < means[1] * math.sqrt(256) < 5

    def test_same_samples(self):
        x, _ = uniform_pair(30, 2, 0)
        assert plugin_empirical(x, x) == 0.0

    def test_one_dimensional(self):
        x, y = uniform_pair(50, 1, 3)
        assert plugin_empirical(x, y) == pytest.approx(w1_1d(x, y), abs=1e-9)


class TestSmoothed:
    def test_deterministic(self):
        x, y = uniform_pair(200, 2, 1)
        for backend in ("oracle", "besov"):
            cfg = EstimatorConfig(1.0, backend)
            assert plugin_smoothed(x, y, cfg) == plugin_smoothed(x, y, cfg)

    def test_level_zero_keeps_mother_atoms(self):
        # levels 0..J are kept, so J = 0 still carries the 2^d - 1 level-0 wavelets
        x, y = uniform_pair(100, 2, 2)
        est = smoothed_estimate(x, y, EstimatorConfig(1.0, "besov", J=0))
        u, v = empirical_coeffs(x, 0), empirical_coeffs(y, 0)
        assert est.J == 0
        assert est.value == pytest.approx(np.abs(u.levels[0][1:] - v.levels[0][1:]).sum(), abs=1e-15)
        # only the scaling atom: both smoothed measures are exactly uniform
        cu, cv = CoefficientArray.zeros(2, 0), CoefficientArray.zeros(2, 0)
        cu.levels[0].flat[0] = cv.levels[0].flat[0] = 1.0
        assert besov_ipm(cu, cv, BesovParams(1.0, "sum", 0)) == 0.0

    def test_oracle_backend_clip_diagnostics(self):
        x, y = uniform_pair(20, 2, 4)
        est = smoothed_estimate(x, y, EstimatorConfig(1.0, "oracle", J=2))
        assert est.clipped_mass[0] > 0 or est.clipped_mass[1] > 0
        assert est.clip_bound == pytest.approx(sum(est.clipped_mass) * math.sqrt(2))
        # unclipped distance between the signed expansions is within the bound
        mu, _ = smoothed_density(empirical_coeffs(x, 2))
        assert mu.values.min() >= 0 and mu.values.mean() == pytest.approx(1.0, abs=1e-12)

    def test_clipping_disabled(self):
        x, y = uniform_pair(20, 2, 4)
        with pytest.raises(ValueError):
            smoothed_estimate(x, y, EstimatorConfig(1.0, "oracle", J=2, clip_negative=False))

    def test_json(self):
        x, y = uniform_pair(64, 2, 5)
        out = smoothed_estimate(x, y, EstimatorConfig(1.0, "oracle")).to_json()
        assert set(out) == {"estimate", "J", "backend", "clipped_mass", "clip_bound"}

    def test_min_sample_size_drives_J(self):
        rng = np.random.default_rng(0)
        x, y = rng.random((64, 2)), rng.random((4096, 2))
        assert smoothed_estimate(x, y, EstimatorConfig(1.0)).J == choose_J(64, 1.0, 2)

    def test_consistency_trend(self):
        means = []
        for n in (64, 512, 4096):
            means.append(np.mean([plugin_smoothed(*uniform_pair(n, 2, s), EstimatorConfig(1.0, "oracle")) for s in range(6)]))
        assert means[0] > means[1] > means[2]

    def test_nu_theta_concentrates(self):
        # the construction level carries no bias; the excess over the closed form is
        # the noise of the unperturbed coefficients and shrinks like m^{-1/2}
        budget, J, d = 1024, 1, 2
        theta = max_tau(budget, J, 1.0, d) * np.array([1.0, -1.0, 0.5, -0.25])
        nu = make_nu_theta(J, theta, budget, d).to_grid()
        target = 2.0 ** (-d * J * (1 / d + 0.5)) * np.abs(theta).sum() / math.sqrt(budget)
        cfg = EstimatorConfig(1.0, "besov", J=J)
        dev = []
        for m in (1024, 16384):
            est = [plugin_smoothed(sample(GridDensity.uniform(2, 0), m, 2 * s), sample(nu, m, 2 * s + 1), cfg) for s in range(40)]
            dev.append(abs(np.mean(est) - target) * math.sqrt(m))
        assert all(v <= 8 for v in dev)
        assert 0.5 <= dev[0] / dev[1] <= 2


class TestErrorDecomposition:
    def test_bias_below_bound(self):
        d, n, J0 = 2, 4096, 3
        theta = max_tau(n, J0, 1.0, d) * np.where(np.arange(4**J0) % 2, 1.0, -1.0)
        nu = make_nu_theta(J0, theta, n, d)
        uni = GridDensity.uniform(d, J0 + 1)
        full = besov_ipm(uni_coeffs(uni, J0), nu.coefficients(J0), BesovParams(1.0, "sum", J0))
        for J in range(J0):
            truncated = besov_ipm(uni_coeffs(uni, J), nu.coefficients(J), BesovParams(1.0, "sum", J))
            bias = full - truncated
            assert 0 <= bias <= bias_bound(J, 1.0, d)

    def test_stochastic_term_scaling_d3(self):
        # uniform vs uniform: the whole error is stochastic
        d, n = 3, 2048
        ratios = []
        for J in (0, 1, 2):
            cfg = EstimatorConfig(1.0, "besov", J=J)
            err = np.mean([plugin_smoothed(*uniform_pair(n, d, s), cfg) for s in range(100)])
            ratios.append(err / stochastic_bound(n, J, d))
        assert max(ratios) / min(ratios) <= 4

    def test_stochastic_term_scaling_d2_log_factor(self):
        # at d = 2 every level contributes equally, giving a (J+1) factor
        d, n = 2, 2048
        ratios = []
        for J in (0, 1, 2, 3):
            cfg = EstimatorConfig(1.0, "besov", J=J)
            err = np.mean([plugin_smoothed(*uniform_pair(n, d, s), cfg) for s in range(100)])
            ratios.append(err / ((J + 1) * stochastic_bound(n, J, d)))
        assert max(ratios) / min(ratios) <= 4


def uni_coeffs(grid, J):
    c = CoefficientArray.zeros(grid.d, J)
    c.levels[0].flat[0] = 1.0
    return c
