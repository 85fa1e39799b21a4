"""Monte Carlo experiments: estimator tables and rate (tightness) studies."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, fields, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import __version__, rng
from .errors import ConfigError
from .estimators import EstimateReport, estimate, normalize_quadrature
from .ou import OuModel, normalize_scheme, ou_matrix
from .pathio import dump_json, fmt
from .specfun import DEFAULT_ORDER
from .wfbm import (
    PathSample, TimeGrid, WfbmParams, build_sampler, covariance_matrix, sample_matrix,
)

ESTIMATORS = ("tilde", "hat", "check")
ESTIMATE_COLUMNS = (
    "path_index", "theta_tilde", "theta_hat", "theta_check",
    "denom_tilde", "denom_discrete", "degenerate_flags",
)


@dataclass(frozen=True)
class ExperimentConfig:
    a: float = 0.5
    b: float = 0.9
    theta: float = 0.7
    n: int = 2000
    horizon: float = 10.0
    n_paths: int = 100
    seed: int = 20240607
    scheme: str = "exact_recursion"
    estimators: tuple = ESTIMATORS
    quadrature: str = "trapezoid"
    output_dir: str = "out"
    order: int = DEFAULT_ORDER

    def __post_init__(self):
        try:
            WfbmParams(self.a, self.b)
            OuModel(WfbmParams(self.a, self.b), self.theta)
            object.__setattr__(self, "scheme", normalize_scheme(self.scheme))
            object.__setattr__(self, "quadrature", normalize_quadrature(self.quadrature))
            rng.check_seed(self.seed)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        for name in ("n", "n_paths", "order"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v:
                raise ConfigError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.n < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        if self.n_paths < 1:
            raise ConfigError(f"n_paths must be >= 1, got {self.n_paths}")
        if not (isinstance(self.horizon, (int, float)) and self.horizon > 0):
            raise ConfigError(f"horizon must be > 0, got {self.horizon!r}")
        object.__setattr__(self, "horizon", float(self.horizon))
        ests = tuple(self.estimators)
        bad = [e for e in ests if e not in ESTIMATORS]
        if bad or not ests:
            raise ConfigError(f"estimators must be a non-empty subset of {ESTIMATORS}, got {ests}")
        object.__setattr__(self, "estimators", tuple(e for e in ESTIMATORS if e in ests))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def params(self) -> WfbmParams:
        return WfbmParams(self.a, self.b)

    @property
    def model(self) -> OuModel:
        return OuModel(self.params, self.theta)

    @property
    def delta_n(self) -> float:
        return self.horizon / self.n

    def grid(self) -> TimeGrid:
        return TimeGrid.uniform(self.n, self.horizon)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["estimators"] = list(self.estimators)
        return d

    def experiment_dict(self) -> dict:
        """``to_dict`` without ``output_dir``, so outputs do not depend on where they go."""
        d = self.to_dict()
        del d["output_dir"]
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        data = dict(data)
        if "estimators" in data:
            data["estimators"] = tuple(data["estimators"])
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def load_config(path=None, **overrides) -> ExperimentConfig:
    """Read a JSON config (defaults if ``path`` is None) and apply overrides.

    A missing file raises ``FileNotFoundError``; bad JSON or values raise
    :class:`ConfigError`.
    """
    data = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    data.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(data)


def run_metadata(config: ExperimentConfig, jitter_used: float | None = None, **extra) -> dict:
    meta = {
        "library": "wfou",
        "version": __version__,
        "subseed_method": rng.SUBSEED_METHOD,
        "normal_method": rng.NORMAL_METHOD,
        "quadrature_order": config.order,
        "scheme": config.scheme,
        "config": config.experiment_dict(),
    }
    if jitter_used is not None:
        meta["jitter_used"] = jitter_used
    meta.update(extra)
    return meta


@dataclass(frozen=True)
class McSummary:
    estimator: str
    mean: float | None
    median: float | None
    std_dev: float | None
    n_paths_used: int
    n_degenerate: int
    config: ExperimentConfig

    def to_dict(self) -> dict:
        d = asdict(self)
        d["config"] = self.config.experiment_dict()
        return d


def summarize(estimator: str, values, config: ExperimentConfig) -> McSummary:
    """Mean, median and sample standard deviation of the defined values.

    ``None`` entries (undefined estimates) are counted and left out.  The
    standard deviation uses the ``n - 1`` divisor and is 0 for one value.
    """
    vals = np.array([v for v in values if v is not None], dtype=float)
    n_deg = len(values) - vals.size
    if vals.size == 0:
        return McSummary(estimator, None, None, None, 0, n_deg, config)
    std = float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0
    return McSummary(estimator, float(np.mean(vals)), float(np.median(vals)), std,
                     int(vals.size), n_deg, config)


def simulate_ou(config: ExperimentConfig, workers=None):
    """(sampler, grid, driver matrix, wfOU matrix) for a configuration."""
    grid = config.grid()
    sampler = build_sampler(covariance_matrix(config.params, grid, config.order))
    driver = sample_matrix(sampler, config.n_paths, config.seed, workers)
    x = ou_matrix(config.model, driver, grid, config.scheme)
    return sampler, grid, driver, x


def estimate_rows(config: ExperimentConfig, grid: TimeGrid, x: np.ndarray) -> list[EstimateReport]:
    return [
        estimate(PathSample(grid, x[k], config.seed, "wfou", k), config.quadrature)
        for k in range(x.shape[0])
    ]


def write_estimates_csv(reports, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ESTIMATE_COLUMNS)
        for r in reports:
            w.writerow([r.path_index, fmt(r.theta_tilde), fmt(r.theta_hat), fmt(r.theta_check),
                        fmt(r.denom_tilde), fmt(r.denom_discrete), r.degenerate_flags])


def read_estimates_csv(path) -> dict:
    """Column name -> list; empty cells become ``None``."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = {c: [] for c in ESTIMATE_COLUMNS}
    for row in rows:
        for c in ESTIMATE_COLUMNS:
            v = row[c]
            if c == "path_index":
                out[c].append(int(v))
            elif c == "degenerate_flags":
                out[c].append(v)
            else:
                out[c].append(None if v == "" else float(v))
    return out


def run_table_experiment(config: ExperimentConfig, workers=None, write: bool = True) -> list[McSummary]:
    """Simulate ``n_paths`` wfOU paths and summarize the requested estimators.

    Writes ``estimates.csv`` (one row per path), ``summary.json`` and
    ``metadata.json`` under ``config.output_dir`` when ``write`` is set.
    """
    sampler, grid, _, x = simulate_ou(config, workers)
    reports = estimate_rows(config, grid, x)
    summaries = [
        summarize(e, [getattr(r, f"theta_{e}") for r in reports], config)
        for e in config.estimators
    ]
    if write:
        out = Path(config.output_dir)
        write_estimates_csv(reports, out / "estimates.csv")
        dump_json({"config": config.experiment_dict(),
                   "summaries": [{k: v for k, v in s.to_dict().items() if k != "config"}
                                 for s in summaries]},
                  out / "summary.json")
        dump_json(run_metadata(config, sampler.jitter_used), out / "metadata.json")
    return summaries


def sqrt_schedule(ns) -> list[tuple[int, float]]:
    """``(n, n^-1/2)`` pairs: ``n Delta^3 -> 0`` while ``n Delta -> inf``."""
    return [(int(n), float(n) ** -0.5) for n in ns]


def check_schedule(schedule, statistic: str) -> list[tuple[int, float]]:
    sched = [(int(n), float(d)) for n, d in schedule]
    if not sched:
        raise ConfigError("rate schedule is empty")
    ns = [n for n, _ in sched]
    ds = [d for _, d in sched]
    horizons = [n * d for n, d in sched]
    if any(d <= 0 for d in ds) or any(n < 2 for n in ns):
        raise ConfigError("schedule needs n >= 2 and Delta > 0")
    if len(sched) > 1:
        if not all(x < y for x, y in zip(ns, ns[1:])):
            raise ConfigError("schedule must be strictly increasing in n")
        if not all(x > y for x, y in zip(ds, ds[1:])):
            raise ConfigError("Delta_n must decrease along the schedule")
        if not all(x < y for x, y in zip(horizons, horizons[1:])):
            raise ConfigError("T_n = n Delta_n must increase along the schedule")
        if statistic == "sqrtT_scaled":
            cubes = [n * d ** 3 for n, d in sched]
            if not all(x > y for x, y in zip(cubes, cubes[1:])):
                raise ConfigError("n Delta_n^3 must decrease along the schedule for sqrtT_scaled")
    return sched


@dataclass
class RateExperimentResult:
    schedule: list
    statistic: str
    per_point_quantiles: list
    verdict_note: str
    q: float = 0.0
    estimator: str = "hat"
    replications: int = 0
    growth_ratio: float = math.nan
    spread_ratio: float = math.nan

    def to_dict(self) -> dict:
        d = asdict(self)
        d["schedule"] = [list(p) for p in self.schedule]
        d["per_point_quantiles"] = [list(p) for p in self.per_point_quantiles]
        return d


@lru_cache(maxsize=4)
def _rate_errors(template: ExperimentConfig, schedule: tuple, replications: int,
                 estimator: str, workers=None) -> tuple:
    out = []
    for i, (n, delta) in enumerate(schedule):
        cfg = replace(template, n=n, horizon=n * delta, n_paths=replications,
                      seed=rng.sub_seed(template.seed, i))
        _, grid, _, x = simulate_ou(cfg, workers)
        vals = np.array([getattr(r, f"theta_{estimator}") for r in estimate_rows(cfg, grid, x)],
                        dtype=object)
        ok = np.array([v is not None for v in vals])
        out.append(np.array(vals[ok], dtype=float) - template.theta)
    return tuple(out)


def run_rate_experiment(
    template: ExperimentConfig, schedule, q: float = 1.0, replications: int = 200,
    statistic: str = "exp_scaled", estimator: str = "hat", workers=None,
) -> RateExperimentResult:
    """Quantiles of a rescaled estimation error along a sampling schedule.

    ``exp_scaled`` is ``Delta^q e^{theta T} (est - theta)``; ``sqrtT_scaled``
    is ``sqrt(T) (est - theta)``.  Quantiles (5%, 50%, 95%) are of the
    absolute statistic.
    """
    if statistic not in ("exp_scaled", "sqrtT_scaled"):
        raise ConfigError(f"unknown statistic {statistic!r}")
    if estimator not in ESTIMATORS:
        raise ConfigError(f"unknown estimator {estimator!r}")
    if q < 0:
        raise ConfigError("q must be >= 0")
    if replications < 1:
        raise ConfigError("replications must be >= 1")
    sched = check_schedule(schedule, statistic)
    errors = _rate_errors(template, tuple(sched), int(replications), estimator, workers)

    quantiles = []
    for (n, delta), err in zip(sched, errors):
        horizon = n * delta
        if statistic == "exp_scaled":
            stat = delta ** q * math.exp(template.theta * horizon) * err
        else:
            stat = math.sqrt(horizon) * err
        qs = np.quantile(np.abs(stat), [0.05, 0.5, 0.95])
        quantiles.append(tuple(float(v) for v in qs))

    q95 = [p[2] for p in quantiles]
    growth = q95[-1] / q95[0] if q95[0] > 0 else math.inf
    spread = max(q95) / min(q95) if min(q95) > 0 else math.inf
    if growth >= 10.0:
        note = f"q95 grew {growth:.3g}x from first to last point: evidence of non-tightness"
    elif spread < 3.0:
        note = f"q95 stayed within a factor {spread:.3g} across the schedule: evidence of tightness"
    else:
        note = f"inconclusive: growth {growth:.3g}x, spread {spread:.3g}x"
    return RateExperimentResult(sched, statistic, quantiles, note, float(q), estimator,
                                int(replications), growth, spread)
