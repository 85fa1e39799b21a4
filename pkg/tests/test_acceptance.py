"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]`` or ``[FAIL]`` line with the measured
quantities before asserting, so ``pytest -v`` output doubles as a report.
"""

import os
import subprocess
import sys

import pytest

from wfou.asymptotics import cauchy_limit_mc, limit_check
from wfou.harness import (
    ExperimentConfig, estimate_rows, run_rate_experiment, simulate_ou, sqrt_schedule, summarize,
)
from wfou.ou import OuModel
from wfou.validation import (
    check_decomposition, check_fbm_reduction, check_identities, check_sampler,
)
from wfou.wfbm import WfbmParams

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
        assert ok, detail
    return emit


def test_criterion_01_covariance_decomposition(report):
    res = check_decomposition()
    report(1, res["passed"], f"worst |fast - quadrature|/(1+|R|) = {res['worst']:.3e} "
                             f"(tol {res['tol']:.0e})")


def test_criterion_02_fbm_reduction(report):
    res = check_fbm_reduction()
    report(2, res["passed"], f"worst relative error vs fBm closed form = {res['worst']:.3e} "
                             f"(tol {res['tol']:.0e})")


def test_criterion_03_sampler(report):
    res = check_sampler()
    zs = ", ".join(f"{p['z']:.2f}" for p in res["probes"])
    report(3, res["passed"], f"probe |z| = [{zs}] (limit {res['tol']:.0f} standard errors)")


LIMIT_SETS = ((0.5, 0.9, 1.0), (0.1, 0.4, 0.7))


def test_criterion_04_I_and_J_limits(report):
    ok = True
    parts = []
    for a, b, theta in LIMIT_SETS:
        for name in ("I", "J"):
            res = limit_check(name, WfbmParams(a, b), theta)
            good = res.relative_errors[-1] < 0.05 and res.monotone
            ok &= good
            errs = "/".join(f"{e:.4f}" for e in res.relative_errors)
            parts.append(f"{name}({a},{b},{theta}) rel err {errs}")
    report(4, ok, "; ".join(parts) + " at t=25/50/100")


def test_criterion_05_variance_functional(report):
    ok = True
    parts = []
    for a, b, theta in LIMIT_SETS:
        res = limit_check("variance", WfbmParams(a, b), theta)
        ok &= res.relative_errors[-1] < 0.05
        parts.append(f"({a},{b},{theta}) rel err at t=100 {res.relative_errors[-1]:.4f}")
    report(5, ok, "; ".join(parts))


def test_criterion_06_identities(report):
    res = check_identities()
    report(6, res["passed"], f"worst |lhs - rhs| = {res['worst']:.3e} over "
                             f"{len(res['cases'])} cases (tol 1e-08)")


# (a, b, theta) -> published (mean, std) for the hat and check estimators
PUBLISHED = {
    (0.5, 0.9, 0.7): {"hat": (0.7223197, 0.1066532), "check": (0.7234658, 0.1064266)},
    (0.5, 0.9, 0.9): {"hat": (0.9075169, 0.08772779), "check": (0.9091066, 0.0879878)},
    (0.1, 0.4, 0.7): {"hat": (0.6764275, 0.1260278), "check": (0.6802641, 0.120526)},
    (0.1, 0.4, 0.9): {"hat": (0.8892152, 0.08042517), "check": (0.8911407, 0.07755756)},
}


@pytest.mark.slow
def test_criterion_07_table_reproduction(report):
    ok = True
    parts = []
    for (a, b, theta), published in PUBLISHED.items():
        cfg = ExperimentConfig(a=a, b=b, theta=theta)
        _, grid, _, x = simulate_ou(cfg)
        rows = estimate_rows(cfg, grid, x)
        ordered = all(r.theta_check >= r.theta_hat for r in rows)
        ok &= ordered
        for est in ("hat", "check"):
            s = summarize(est, [getattr(r, f"theta_{est}") for r in rows], cfg)
            _, pub_std = published[est]
            mean_ok = abs(s.mean - theta) <= 0.10
            std_ok = 0.3 * pub_std <= s.std_dev <= 3.0 * pub_std
            ok &= mean_ok and std_ok
            parts.append(
                f"({a},{b},{theta}) {est}: mean {s.mean:.4f}{'' if mean_ok else '!'} "
                f"std {s.std_dev:.4f} vs [{0.3 * pub_std:.4f}, {3 * pub_std:.4f}]"
                f"{'' if std_ok else '!'}"
            )
        parts.append(f"({a},{b},{theta}) check>=hat on every path: {ordered}")
    report(7, ok, "T=10, n=2000, 100 paths; " + "; ".join(parts))


@pytest.mark.slow
def test_criterion_08_cauchy_limit(report):
    res = cauchy_limit_mc(OuModel(WfbmParams(0.5, 0.9), 0.7), 12.0, 500,
                          seed=ExperimentConfig().seed, n=1200)
    ok = res.p_value > 0.01 and res.median_ok
    report(8, ok, (
        f"scale {res.scale:.4f}: KS {res.ks_statistic:.4f}, p {res.p_value:.3e}; "
        f"median {res.median:.4f} vs 99% band [{res.median_band[0]:.4f}, "
        f"{res.median_band[1]:.4f}]; square-root scale {res.alt_scale:.4f} gives "
        f"p {res.alt_p_value:.3e}"
    ))


@pytest.mark.slow
def test_criterion_09_rates(report):
    tmpl = ExperimentConfig()
    sched = sqrt_schedule([500, 1000, 2000, 4000])
    sq = run_rate_experiment(tmpl, sched, 1.0, 200, "sqrtT_scaled", "hat")
    ex = run_rate_experiment(tmpl, sched, 1.0, 200, "exp_scaled", "hat")
    ok = sq.spread_ratio < 3.0 and ex.growth_ratio >= 10.0
    q_sq = ", ".join(f"{q[2]:.4g}" for q in sq.per_point_quantiles)
    q_ex = ", ".join(f"{q[2]:.4g}" for q in ex.per_point_quantiles)
    report(9, ok, f"sqrt(T) q95 [{q_sq}] spread {sq.spread_ratio:.3g}x (< 3); "
                  f"exp q95 [{q_ex}] growth {ex.growth_ratio:.3g}x (>= 10)")


def _run_cli(args, out, workers):
    env = dict(os.environ, WFOU_WORKERS=str(workers))
    subprocess.run([sys.executable, "-m", "wfou.cli", *args, "--out", str(out)],
                   check=True, env=env, capture_output=True)
    return {p.relative_to(out): p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()}


@pytest.mark.slow
def test_criterion_10_determinism(report, tmp_path):
    ok = True
    parts = []
    for cmd in (["validate"], ["mc-table"]):
        runs = [
            _run_cli(cmd, tmp_path / f"{cmd[0]}_{tag}", workers)
            for tag, workers in (("w1a", 1), ("w1b", 1), ("w4", 4))
        ]
        same = bool(runs[0]) and runs[0] == runs[1] == runs[2]
        ok &= same
        parts.append(f"{cmd[0]}: {len(runs[0])} files identical across 2 runs and 1 vs 4 "
                     f"workers: {same}")
    report(10, ok, "; ".join(parts))
