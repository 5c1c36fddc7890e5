import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from w1minimax.densities import GridDensity, SampleSet
from w1minimax.errors import DimensionError, ShapeError, SizeError
from w1minimax.transport import DiscreteMeasure, w1_1d, w1_discrete, w1_empirical, w1_grid


def random_grid(rng, d, L, sparsity=0.0):
    m = rng.random(2 ** (d * L))
    m[rng.random(m.size) < sparsity] = 0.0
    if m.sum() == 0:
        m[0] = 1.0
    return GridDensity.from_masses(d, L, m)


def brute_force_assignment(x, y):
    cost = np.linalg.norm(x[:, None] - y[None], axis=-1)
    n = len(x)
    return min(math.fsum(cost[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n))) / n


class TestOneDimensional:
    def test_diracs(self):
        assert w1_1d(DiscreteMeasure([0.0], [1.0]), DiscreteMeasure([1.0], [1.0])) == 1.0

    def test_uniform_vs_half(self):
        assert w1_1d(GridDensity.uniform(1, 1), GridDensity(1, 1, [2.0, 0.0])) == 0.25

    def test_identical(self):
        g = GridDensity.from_masses(1, 3, np.arange(8) + 1.0)
        assert w1_1d(g, g) == 0.0

    def test_dimension_error(self):
        with pytest.raises(DimensionError):
            w1_1d(GridDensity.uniform(2, 1), GridDensity.uniform(2, 1))

    def test_crossing_cdfs(self):
        # uniform vs density 2 on [1/4, 3/4): F - G crosses zero twice
        got = w1_1d(GridDensity.uniform(1, 2), GridDensity(1, 2, [0, 2, 2, 0]))
        assert got == pytest.approx(0.125, abs=1e-15)

    def test_samples(self):
        x = SampleSet(np.array([[0.1], [0.5]]), seed=0, source="t")
        y = SampleSet(np.array([[0.2], [0.9]]), seed=0, source="t")
        assert w1_1d(x, y) == pytest.approx(0.25, abs=1e-15)


class TestGrid:
    def test_single_arc(self):
        mu = GridDensity.from_masses(2, 1, [1, 0, 0, 0])
        nu = GridDensity.from_masses(2, 1, [0, 0, 0, 1])
        sol = w1_grid(mu, nu)
        assert sol.cost == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
        assert sol.flow == [(0, 3, 1.0)]

    def test_product_instance(self):
        L = 3
        mu = GridDensity.uniform(2, L)
        v = np.zeros((8, 8))
        v[:, :4] = 2.0
        sol = w1_grid(mu, GridDensity(2, L, v))
        assert sol.cost == pytest.approx(0.25, abs=1e-12)

    def test_equal_measures(self):
        g = GridDensity.from_masses(2, 2, np.arange(16) + 1.0)
        sol = w1_grid(g, g)
        assert sol.cost == 0.0 and sol.flow == []

    def test_mismatch_and_cap(self):
        with pytest.raises(ShapeError):
            w1_grid(GridDensity.uniform(2, 1), GridDensity.uniform(2, 2))
        with pytest.raises(SizeError):
            w1_grid(GridDensity.uniform(2, 4), GridDensity.uniform(2, 4), cell_cap=100)

    def test_flow_conserves_marginals_and_cost(self):
        rng = np.random.default_rng(0)
        mu, nu = random_grid(rng, 2, 3), random_grid(rng, 2, 3)
        sol = w1_grid(mu, nu)
        f = sol.flow_array()
        src, dst, mass = f[:, 0].astype(int), f[:, 1].astype(int), f[:, 2]
        assert np.abs(np.bincount(src, mass, 64) - mu.masses()).max() <= 1e-9
        assert np.abs(np.bincount(dst, mass, 64) - nu.masses()).max() <= 1e-9
        c = mu.cell_centers()
        assert abs(math.fsum(mass * np.linalg.norm(c[src] - c[dst], axis=1)) - sol.cost) <= 1e-9
        assert sol.dual_gap <= 1e-9 and sol.status == "optimal"

    def test_discretization_certificate(self):
        rng = np.random.default_rng(1)
        for _ in range(5):
            mu, nu = random_grid(rng, 2, 2), random_grid(rng, 2, 2)
            a = w1_grid(mu.refine(3), nu.refine(3)).cost
            b = w1_grid(mu.refine(4), nu.refine(4)).cost
            assert abs(a - b) <= math.sqrt(2) * 2**-3

    def test_sparse_support(self):
        rng = np.random.default_rng(7)
        mu, nu = random_grid(rng, 2, 3, 0.8), random_grid(rng, 2, 3, 0.8)
        ref = w1_discrete(DiscreteMeasure.from_grid(mu), DiscreteMeasure.from_grid(nu)).cost
        assert w1_grid(mu, nu).cost == pytest.approx(ref, abs=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**31), d=st.integers(1, 3))
    def test_metric_property(self, seed, d):
        rng = np.random.default_rng(seed)
        L = {1: 4, 2: 2, 3: 1}[d]
        a, b, c = (random_grid(rng, d, L, 0.3) for _ in range(3))
        ab = w1_grid(a, b).cost
        assert ab == w1_grid(b, a).cost
        assert ab <= w1_grid(a, c).cost + w1_grid(c, b).cost + 1e-9


class TestEmpirical:
    def test_identical(self):
        x = np.random.default_rng(0).random((10, 2))
        assert w1_empirical(x, x) == 0.0

    def test_points(self):
        assert w1_empirical(np.array([[0.0]]), np.array([[1.0]])) == 1.0

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
    def test_permutation_brute_force(self, n):
        rng = np.random.default_rng(n)
        for _ in range(5):
            x, y = rng.random((n, 2)), rng.random((n, 2))
            assert w1_empirical(x, y) == brute_force_assignment(x, y)

    def test_unequal_sizes_match_discrete(self):
        rng = np.random.default_rng(3)
        x, y = rng.random((5, 2)), rng.random((7, 2))
        ref = w1_discrete(DiscreteMeasure(x, np.full(5, 0.2)), DiscreteMeasure(y, np.full(7, 1 / 7))).cost
        assert w1_empirical(x, y) == pytest.approx(ref, abs=1e-12)

    def test_one_dimensional_agrees(self):
        rng = np.random.default_rng(4)
        x, y = rng.random((40, 1)), rng.random((40, 1))
        assert w1_empirical(x, y) == pytest.approx(w1_1d(SampleSet(x, 0, "x"), SampleSet(y, 0, "y")), abs=1e-9)

    def test_size_cap(self):
        with pytest.raises(SizeError):
            w1_empirical(np.zeros((10, 1)), np.zeros((10, 1)), arc_cap=50)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            w1_empirical(np.zeros((2, 1)), np.zeros((2, 2)))
