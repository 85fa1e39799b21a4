"""Command line entry point: ``wfou <subcommand> [options]``.

Exit codes: 0 success, 2 configuration error, 3 numeric failure (including
a failed ``validate``), 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import pathio
from .asymptotics import (
    cauchy_limit_mc, delta_g_identity_check, lambda_g_identity_check, limit_check,
)
from .errors import ConfigError, NumericError
from .estimators import estimate
from .harness import (
    load_config, run_metadata, run_rate_experiment, run_table_experiment, simulate_ou,
    sqrt_schedule, write_estimates_csv,
)
from .ou import OuModel
from .rng import sub_seed
from .validation import run_validation
from .wfbm import PathSample

EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 2, 3, 4


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory (overrides output_dir)")
    p.add_argument("--scheme", choices=["exact", "euler"])
    p.add_argument("--quadrature", choices=["trapezoid", "left"])
    p.add_argument("--paths", type=int, help="number of paths")
    p.add_argument("--n", type=int, help="number of intervals")
    p.add_argument("--horizon", type=float, help="time horizon T")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wfou", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    _common(sub.add_parser("simulate", help="write wfBm and wfOU paths"))

    est = sub.add_parser("estimate", help="estimate theta from path CSV files")
    _common(est)
    est.add_argument("inputs", nargs="+", help="path CSV files or directories")

    _common(sub.add_parser("mc-table", help="Monte Carlo estimator table"))

    asy = sub.add_parser("asymptotics", help="limit, identity and Cauchy checks")
    _common(asy)
    asy.add_argument("--t-values", default="25,50,100")
    asy.add_argument("--cauchy-t", type=float, default=12.0)
    asy.add_argument("--replications", type=int, default=500)
    asy.add_argument("--skip-cauchy", action="store_true")

    rates = sub.add_parser("rates", help="tightness / non-tightness rate experiment")
    _common(rates)
    rates.add_argument("--schedule", default="500,1000,2000,4000",
                       help="comma-separated n values; Delta_n = n^-1/2")
    rates.add_argument("--q", type=float, default=1.0)
    rates.add_argument("--replications", type=int, default=200)
    rates.add_argument("--estimator", choices=["hat", "check", "tilde"], default="hat")

    _common(sub.add_parser("validate", help="run the invariant suite"))
    return parser


def _config(args):
    return load_config(
        args.config, seed=args.seed, output_dir=args.out, scheme=args.scheme,
        quadrature=args.quadrature, n_paths=args.paths, n=args.n, horizon=args.horizon,
    )


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _table(headers, rows) -> str:
    cells = [[str(h) for h in headers]] + [
        [f"{v:.6g}" if isinstance(v, float) else str(v) for v in row] for row in rows
    ]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def cmd_simulate(args) -> int:
    cfg = _config(args)
    sampler, grid, driver, x = simulate_ou(cfg)
    out = Path(cfg.output_dir) / "paths"
    base = {"a": cfg.a, "b": cfg.b, "quadrature_order": cfg.order,
            "jitter_used": sampler.jitter_used}
    for k in range(cfg.n_paths):
        ss = sub_seed(cfg.seed, k)
        pathio.write_path(PathSample(grid, driver[k], cfg.seed, "wfbm", k, ss, dict(base)), out)
        pathio.write_path(
            PathSample(grid, x[k], cfg.seed, "wfou", k, ss,
                       dict(base, theta=cfg.theta, scheme=cfg.scheme)), out)
    pathio.dump_json(run_metadata(cfg, sampler.jitter_used), Path(cfg.output_dir) / "metadata.json")
    print(f"wrote {2 * cfg.n_paths} paths to {out}")
    return 0


def cmd_estimate(args) -> int:
    cfg = _config(args)
    files = []
    for item in args.inputs:
        p = Path(item)
        if p.is_dir():
            files.extend(sorted(p.glob("*.csv")))
        elif p.exists():
            files.append(p)
        else:
            raise FileNotFoundError(f"no such file or directory: {item}")
    reports = [estimate(pathio.read_path(f), cfg.quadrature) for f in files]
    out = Path(cfg.output_dir)
    write_estimates_csv(reports, out / "estimates.csv")
    pathio.dump_json([dict(r.to_dict(), source=str(f)) for r, f in zip(reports, files)],
                     out / "estimates.json")
    print(_table(["file", "theta_tilde", "theta_hat", "theta_check"],
                 [[f.name, r.theta_tilde, r.theta_hat, r.theta_check]
                  for r, f in zip(reports, files)]))
    return 0


def cmd_mc_table(args) -> int:
    cfg = _config(args)
    summaries = run_table_experiment(cfg)
    print(f"a={cfg.a} b={cfg.b} theta={cfg.theta} n={cfg.n} T={cfg.horizon} "
          f"paths={cfg.n_paths} seed={cfg.seed} scheme={cfg.scheme}")
    print(_table(["estimator", "mean", "median", "std_dev", "used", "degenerate"],
                 [[s.estimator, s.mean, s.median, s.std_dev, s.n_paths_used, s.n_degenerate]
                  for s in summaries]))
    return 0


def cmd_asymptotics(args) -> int:
    cfg = _config(args)
    p = cfg.params
    t_values = _floats(args.t_values)
    report = {"config": cfg.experiment_dict(), "limits": [], "identities": []}
    rows = []
    for name in ("I", "J", "variance"):
        res = limit_check(name, p, cfg.theta, t_values)
        report["limits"].append(res.to_dict())
        for t, v, e in zip(res.t_values, res.observed, res.relative_errors):
            rows.append([name, t, v, res.limit, e])
    print(_table(["quantity", "t", "value", "limit", "rel_error"], rows))

    rows = []
    for g_id in ("product", "squares"):
        for theta in (0.5, 1.0, 2.0):
            for t in (0.5, 1.0, 2.0):
                l1, r1 = delta_g_identity_check(theta, t, g_id)
                l2, r2 = lambda_g_identity_check(theta, t / 2.0, t, g_id)
                rows.append([g_id, theta, t, abs(l1 - r1), abs(l2 - r2)])
                report["identities"].append(
                    {"g": g_id, "theta": theta, "t": t, "delta_lhs": l1, "delta_rhs": r1,
                     "lambda_lhs": l2, "lambda_rhs": r2})
    print()
    print(_table(["g", "theta", "t", "|Delta gap|", "|lambda gap|"], rows))

    if not args.skip_cauchy:
        res = cauchy_limit_mc(OuModel(p, cfg.theta), args.cauchy_t, args.replications, cfg.seed,
                              scheme=cfg.scheme, quadrature=cfg.quadrature)
        report["cauchy"] = res.to_dict(with_samples=False)
        print()
        print(_table(["scale", "value", "KS", "p_value"],
                     [["literal", res.scale, res.ks_statistic, res.p_value],
                      ["sqrt", res.alt_scale, res.alt_ks_statistic, res.alt_p_value]]))
        print(f"median {res.median:.6g}, 99% band [{res.median_band[0]:.6g}, "
              f"{res.median_band[1]:.6g}], excluded {res.n_excluded}")
    if args.out:
        pathio.dump_json(report, Path(cfg.output_dir) / "asymptotics.json")
    return 0


def cmd_rates(args) -> int:
    cfg = _config(args)
    ns = [int(v) for v in _floats(args.schedule)]
    sched = sqrt_schedule(ns)
    report = {"config": cfg.experiment_dict(), "results": []}
    for stat in ("sqrtT_scaled", "exp_scaled"):
        res = run_rate_experiment(cfg, sched, args.q, args.replications, stat, args.estimator)
        report["results"].append(res.to_dict())
        print(f"{stat}: {res.verdict_note}")
        print(_table(["n", "Delta_n", "q05", "q50", "q95"],
                     [[n, d, *qs] for (n, d), qs in zip(res.schedule, res.per_point_quantiles)]))
        print()
    pathio.dump_json(report, Path(cfg.output_dir) / "rates.json")
    return 0


def cmd_validate(args) -> int:
    cfg = _config(args)
    report = run_validation(seed=cfg.seed)
    out = Path(cfg.output_dir)
    pathio.dump_json(report, out / "validate.json")
    print(_table(["check", "worst", "tol", "passed"],
                 [[c["name"], c["worst"], c["tol"], c["passed"]] for c in report["checks"]]))
    return 0 if report["passed"] else EXIT_NUMERIC


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "mc-table": cmd_mc_table,
    "asymptotics": cmd_asymptotics,
    "rates": cmd_rates,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"wfou: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"wfou: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"wfou: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
