import json

import pytest

from wfou.cli import main
from wfou.pathio import read_path


def _files(directory):
    return {p.relative_to(directory): p.read_bytes() for p in sorted(directory.rglob("*"))
            if p.is_file()}


def test_missing_config_exits_4(tmp_path, capsys):
    assert main(["mc-table", "--config", str(tmp_path / "missing.json")]) == 4
    assert "I/O error" in capsys.readouterr().err


def test_bad_config_exits_2(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"a": -0.5, "b": 0.7}))
    assert main(["mc-table", "--config", str(cfg)]) == 2
    cfg.write_text("[1, 2")
    assert main(["mc-table", "--config", str(cfg)]) == 2


def test_bad_override_exits_2(tmp_path):
    assert main(["simulate", "--paths", "0", "--out", str(tmp_path)]) == 2


def test_simulate_is_byte_identical(tmp_path):
    args = ["simulate", "--seed", "42", "--paths", "3", "--n", "50", "--horizon", "2"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    a, b = _files(tmp_path / "a"), _files(tmp_path / "b")
    assert len(a) == 2 * 3 * 2 + 1
    assert a == b


def test_simulate_then_estimate_round_trip(tmp_path):
    sim = ["simulate", "--seed", "7", "--paths", "2", "--n", "100", "--horizon", "5"]
    assert main(sim + ["--out", str(tmp_path / "sim")]) == 0
    paths = sorted((tmp_path / "sim" / "paths").glob("wfou_*.csv"))
    assert len(paths) == 2
    p = read_path(paths[0])
    assert p.kind == "wfou" and p.seed == 7 and p.meta["theta"] == 0.7
    assert main(["estimate", *map(str, paths), "--out", str(tmp_path / "est")]) == 0
    rows = json.loads((tmp_path / "est" / "estimates.json").read_text())
    assert len(rows) == 2 and all(r["theta_check"] >= r["theta_hat"] for r in rows)


def test_estimate_missing_input_exits_4(tmp_path):
    assert main(["estimate", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]) == 4


def test_validate_exits_0(tmp_path):
    assert main(["validate", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "validate.json").read_text())
    assert report["passed"] is True and len(report["checks"]) == 5


def test_mc_table_prints_summary(tmp_path, capsys):
    out = tmp_path / "m"
    assert main(["mc-table", "--paths", "10", "--n", "200", "--horizon", "5",
                 "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "hat" in text and "check" in text and "tilde" in text
    assert {"estimates.csv", "summary.json", "metadata.json"} <= {p.name for p in out.iterdir()}


def test_asymptotics_without_cauchy(tmp_path):
    assert main(["asymptotics", "--skip-cauchy", "--t-values", "10,20",
                 "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "asymptotics.json").read_text())
    assert len(report["limits"]) == 3 and len(report["identities"]) == 18


def test_asymptotics_bad_t_values_exits_2():
    assert main(["asymptotics", "--skip-cauchy", "--t-values", "ten"]) == 2


def test_rates_small_schedule(tmp_path):
    assert main(["rates", "--schedule", "100,400", "--replications", "20",
                 "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "rates.json").read_text())
    assert [r["statistic"] for r in report["results"]] == ["sqrtT_scaled", "exp_scaled"]


def test_unknown_scheme_rejected_by_parser():
    with pytest.raises(SystemExit):
        main(["simulate", "--scheme", "rk4"])
