"""Monte Carlo rate studies: draw samples, score estimators against exact truth, fit log-log slopes."""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed
from scipy import stats

from .besov import BesovParams, besov_ipm
from .densities import GridDensity, make_nu_theta, max_tau, sample
from .errors import ConfigError, FitError, SizeError
from .estimators import EstimatorConfig, choose_J, plugin_empirical, smoothed_estimate
from .transport import DEFAULT_CELL_CAP, w1_grid
from .wavelet import analyze

log = logging.getLogger(__name__)

ESTIMATORS = ("empirical", "smoothed-oracle", "smoothed-besov")
INSTANCES = ("uniform-vs-uniform", "uniform-vs-nu-theta", "bump-pair")


@dataclass
class ExperimentConfig:
    d: int
    beta: float
    instance: dict
    estimators: list
    n_grid: list
    trials: int
    base_seed: int
    truth_resolution: int
    output_path: str
    smoothing_J: int | str | None = None  # None: choose_J(n); int: fixed; "instance": construction level
    n_jobs: int = 1

    def __post_init__(self):
        if not isinstance(self.d, int) or self.d < 1:
            raise ConfigError("d must be a positive integer")
        if self.beta < 0:
            raise ConfigError("beta must be >= 0")
        kind = self.instance.get("kind") if isinstance(self.instance, dict) else None
        if kind not in INSTANCES:
            raise ConfigError(f"instance.kind must be one of {INSTANCES}")
        bad = [e for e in self.estimators if e not in ESTIMATORS]
        if bad or not self.estimators:
            raise ConfigError(f"estimators must be a nonempty subset of {ESTIMATORS}, got {bad or 'none'}")
        if len(set(self.estimators)) != len(self.estimators):
            raise ConfigError("estimators must not repeat")
        if not self.n_grid or any(int(n) != n or n < 2 for n in self.n_grid):
            raise ConfigError("n_grid must be integers >= 2")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ConfigError("n_grid must be strictly increasing")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not 0 <= self.base_seed < 2**64:
            raise ConfigError("base_seed must be a 64-bit unsigned integer")
        if self.truth_resolution < 0:
            raise ConfigError("truth_resolution must be >= 0")
        sj = self.smoothing_J
        if not (sj is None or sj == "instance" or (isinstance(sj, int) and sj >= 0)):
            raise ConfigError("smoothing_J must be null, a level >= 0, or 'instance'")
        if sj == "instance" and kind != "uniform-vs-nu-theta":
            raise ConfigError("smoothing_J='instance' needs a uniform-vs-nu-theta instance")

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(obj) - known
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        missing = [k for k in ("d", "beta", "instance", "estimators", "n_grid", "trials", "base_seed", "truth_resolution", "output_path") if k not in obj]
        if missing:
            raise ConfigError(f"missing config fields: {missing}")
        return cls(**obj)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            obj = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(obj)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RateRow:
    estimator: str
    n: int
    mean_abs_error: float
    std_error: float
    trials: int


@dataclass
class RateTable:
    rows: list
    fitted: dict = field(default_factory=dict)  # estimator -> {slope, intercept, half_width}
    truth: dict = field(default_factory=dict)
    levels: dict = field(default_factory=dict)  # n -> smoothing level used
    warnings: list = field(default_factory=list)

    def rows_for(self, estimator: str) -> list:
        return [r for r in self.rows if r.estimator == estimator]

    def slope(self, estimator: str) -> float:
        return self.fitted[estimator]["slope"]

    def to_json(self) -> dict:
        return {
            "rows": [asdict(r) for r in self.rows],
            "fitted": self.fitted,
            "truth": self.truth,
            "levels": self.levels,
            "warnings": self.warnings,
        }


def fit_slope(rows, estimator: str | None = None) -> tuple[float, float, float]:
    """OLS of log(mean error) on log(n); half-width is the 95% t-interval of the slope.

    ``rows`` is a RateTable, a list of RateRow, or a list of (n, mean_error) pairs.
    """
    if isinstance(rows, RateTable):
        rows = rows.rows
    pts = []
    for r in rows:
        if isinstance(r, RateRow):
            if estimator is None or r.estimator == estimator:
                pts.append((r.n, r.mean_abs_error))
        else:
            pts.append((r[0], r[1]))
    ns = np.array([p[0] for p in pts], dtype=float)
    errs = np.array([p[1] for p in pts], dtype=float)
    if len(np.unique(ns)) < 3:
        raise FitError("need at least 3 distinct n values")
    if np.any(errs <= 0) or not np.all(np.isfinite(errs)):
        raise FitError("mean errors must be positive and finite")
    x, y = np.log(ns), np.log(errs)
    xm = x - x.mean()
    sxx = float(xm @ xm)
    slope = float(xm @ (y - y.mean()) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    dof = len(x) - 2
    se = math.sqrt(float(resid @ resid) / dof / sxx) if dof > 0 else 0.0
    half = float(stats.t.ppf(0.975, dof)) * se if dof > 0 else math.inf
    return slope, intercept, half


# ---------------------------------------------------------------- instances


def _bump_grid(d: int, L: int, params: dict, which: int) -> GridDensity:
    """``1 + height * prod_i max(0, 1 - |x_i - c_i| / width)`` at cell centers, renormalized."""
    center = np.asarray(params["centers"][which], dtype=float)
    width = float(params.get("width", 0.25))
    height = float(params.get("height", 1.0))
    if center.shape != (d,) or width <= 0 or height < -1:
        raise ConfigError("bump-pair needs two centers of length d, width > 0, height >= -1")
    side = 2**L
    axis = (np.arange(side) + 0.5) / side
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    tent = np.ones((side,) * d)
    for i in range(d):
        tent *= np.clip(1 - np.abs(grids[i] - center[i]) / width, 0, None)
    v = 1 + height * tent
    return GridDensity(d, L, v / v.mean())


class Instance:
    """The pair (mu, nu) as grid densities plus the ground-truth functionals."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        params = config.instance
        self.kind = params["kind"]
        d, L = config.d, config.truth_resolution
        self.construction_J = None
        if self.kind == "uniform-vs-uniform":
            self.mu = self.nu = GridDensity.uniform(d, 0)
        elif self.kind == "uniform-vs-nu-theta":
            J = int(params.get("J", 1))
            self.construction_J = J
            budget = int(params.get("n_budget", config.n_grid[-1]))
            cells = 2 ** (d * J)
            if "theta" in params:
                theta = np.asarray(params["theta"], dtype=float)
            else:
                rng = np.random.default_rng(int(params.get("seed", 0)))
                signs = params.get("signs") or rng.choice([-1.0, 1.0], size=cells).tolist()
                theta = float(params.get("scale", 1.0)) * max_tau(budget, J, config.beta, d) * np.asarray(signs, dtype=float)
            self.nu_density = make_nu_theta(J, theta, budget, d)
            self.mu = GridDensity.uniform(d, 0)
            self.nu = self.nu_density.to_grid()
        else:
            if L < 1:
                raise ConfigError("bump-pair needs truth_resolution >= 1")
            self.mu = _bump_grid(d, L, params, 0)
            self.nu = _bump_grid(d, L, params, 1)

    def hash(self) -> str:
        key = {"d": self.config.d, "L": self.config.truth_resolution, "instance": self.config.instance, "beta": self.config.beta}
        return hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()[:16]

    def w1_truth(self, L: int | None = None, cell_cap: int = DEFAULT_CELL_CAP) -> float:
        if self.kind == "uniform-vs-uniform":
            return 0.0
        L = self.config.truth_resolution if L is None else L
        L = max(L, self.mu.L, self.nu.L)
        mu, nu = self.mu.refine(L), self.nu.refine(L)
        try:
            return w1_grid(mu, nu, cell_cap).cost
        except SizeError as exc:
            raise SizeError(f"truth oracle at resolution {L}: {exc}") from exc

    def besov_truth(self, J: int) -> float:
        if self.kind == "uniform-vs-uniform":
            return 0.0
        L = max(J + 1, self.mu.L, self.nu.L)
        u = analyze(self.mu.refine(L), J)
        v = analyze(self.nu.refine(L), J)
        return besov_ipm(u, v, BesovParams(1.0, "sum", J))


def _cached_w1(inst: Instance, out: Path) -> float:
    if inst.kind != "bump-pair":
        return inst.w1_truth()
    cache = out / ".truth_cache" / f"{inst.hash()}.json"
    if cache.exists():
        return json.loads(cache.read_text())["w1"]
    value = inst.w1_truth()
    cache.parent.mkdir(parents=True, exist_ok=True)
    cache.write_text(json.dumps({"w1": value, "instance": inst.config.instance, "L": inst.config.truth_resolution}))
    return value


# ---------------------------------------------------------------- study


def smoothing_level(config: ExperimentConfig, inst: Instance, n: int) -> int:
    if config.smoothing_J is None:
        return choose_J(n, config.beta, config.d)
    if config.smoothing_J == "instance":
        return inst.construction_J
    return int(config.smoothing_J)


def trial_seeds(base_seed: int, n: int, trial: int) -> tuple[int, int]:
    """Seeds for (X, Y), shared by every estimator at this (n, trial)."""
    state = np.random.SeedSequence([base_seed, n, trial]).generate_state(2, dtype=np.uint64)
    return int(state[0]), int(state[1])


def _run_trial(config: ExperimentConfig, inst: Instance, n: int, trial: int, J: int, truths: dict) -> list:
    sx, sy = trial_seeds(config.base_seed, n, trial)
    X = sample(inst.mu, n, sx)
    Y = sample(inst.nu, n, sy)
    out = []
    for est in config.estimators:
        if est == "empirical":
            value = plugin_empirical(X, Y)
        else:
            backend = "oracle" if est == "smoothed-oracle" else "besov"
            value = smoothed_estimate(X, Y, EstimatorConfig(config.beta, backend, J)).value
        out.append((est, n, trial, abs(value - truths[est])))
    return out


def run_rate_study(config: ExperimentConfig, write: bool = True) -> RateTable:
    inst = Instance(config)
    out = Path(config.output_path)
    warnings = []
    w1 = _cached_w1(inst, out) if write else inst.w1_truth()
    levels = {n: smoothing_level(config, inst, n) for n in config.n_grid}
    truth_by_n = {}
    for n in config.n_grid:
        truth_by_n[n] = {
            "empirical": w1,
            "smoothed-oracle": w1,
            "smoothed-besov": inst.besov_truth(levels[n]) if "smoothed-besov" in config.estimators else None,
        }
    resolution_err = math.sqrt(config.d) * 2.0 ** (-max(config.truth_resolution, inst.nu.L))
    uses_w1 = {"empirical", "smoothed-oracle"} & set(config.estimators)
    if uses_w1 and inst.kind != "uniform-vs-uniform" and resolution_err > 0.1 * w1:
        msg = f"truth resolution error bound {resolution_err:.3g} exceeds 10% of the truth {w1:.3g}"
        log.warning(msg)
        warnings.append(msg)

    tasks = [(n, t) for n in config.n_grid for t in range(config.trials)]
    per_task = Parallel(n_jobs=config.n_jobs)(
        delayed(_run_trial)(config, inst, n, t, levels[n], truth_by_n[n]) for n, t in tasks
    )
    records = [r for chunk in per_task for r in chunk]
    order = {e: i for i, e in enumerate(config.estimators)}
    records.sort(key=lambda r: (order[r[0]], r[1], r[2]))

    rows = []
    for est in config.estimators:
        for n in config.n_grid:
            errs = np.array([r[3] for r in records if r[0] == est and r[1] == n])
            se = float(errs.std(ddof=1) / math.sqrt(len(errs))) if len(errs) > 1 else 0.0
            rows.append(RateRow(est, n, math.fsum(errs.tolist()) / len(errs), se, len(errs)))
    table = RateTable(rows, truth={str(n): v for n, v in truth_by_n.items()}, levels={str(n): J for n, J in levels.items()}, warnings=warnings)
    for est in config.estimators:
        try:
            slope, intercept, half = fit_slope(table.rows_for(est))
            table.fitted[est] = {"slope": slope, "intercept": intercept, "half_width": half}
        except FitError as exc:
            table.fitted[est] = {"error": str(exc)}
    if write:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "results.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["estimator", "n", "trial", "abs_error"])
            for est, n, t, err in records:
                w.writerow([est, n, t, repr(float(err))])
        summary = {"config": config.to_dict(), **table.to_json()}
        (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    return table
