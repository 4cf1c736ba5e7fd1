import csv
import json
import math
import subprocess
import sys

import pytest

from biphoton import ConfigError, cli


def _write(tmp_path, obj, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(path)


def _run(tmp_path, command, cfg, *extra):
    return cli.main([command, "--config", _write(tmp_path, cfg), "--out",
                     str(tmp_path / "out"), *extra])


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# -- config handling --------------------------------------------------------------

@pytest.mark.parametrize("cfg", [
    {"schema": 1, "unknown": 3},
    {"schema": 2},
    {},
    [1, 2],
    {"schema": 1, "ratios": []},
    {"schema": 1, "ratios": [1.5]},
    {"schema": 1, "model": {"kind": "lorentzian"}},
    {"schema": 1, "model": {"kind": "sinc-gaussian", "chirp": 1.0}},
])
def test_config_errors_exit_2(tmp_path, cfg):
    assert _run(tmp_path, "nmax-table", cfg) == 2


def test_bad_json_and_missing_file(tmp_path):
    assert _run(tmp_path, "nmax-table", "{not json") == 2
    assert cli.main(["nmax-table", "--config", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path)]) == 2


def test_usage_errors_exit_2(tmp_path):
    assert cli.main(["no-such-command", "--config", "x", "--out", "y"]) == 2
    assert cli.main(["nmax-table"]) == 2
    assert _run(tmp_path, "nmax-table", {"schema": 1}, "--tolerance", "-1") == 2
    assert _run(tmp_path, "nmax-table", {"schema": 1}, "--threads", "zero") == 2


def test_validate_config_merges_defaults():
    cfg = cli.validate_config({"schema": 1, "mean_N": 0.5}, "fig-disjoint")
    assert cfg["mean_N"] == 0.5
    assert cfg["composition"] == "additive"
    with pytest.raises(ConfigError):
        cli.validate_config({"schema": 1, "composition": "mixed"}, "fig-disjoint")
    with pytest.raises(ConfigError):
        cli.validate_config({"schema": 1, "delta_ratios": [0.0]}, "fig-disjoint")


def test_threads_resolution(monkeypatch):
    monkeypatch.delenv("BIPHOTON_THREADS", raising=False)
    assert cli.resolve_threads(None) == 1
    monkeypatch.setenv("BIPHOTON_THREADS", "3")
    assert cli.resolve_threads(None) == 3
    assert cli.resolve_threads("2") == 2
    monkeypatch.setenv("BIPHOTON_THREADS", "x")
    with pytest.raises(ConfigError):
        cli.resolve_threads(None)
    with pytest.raises(ConfigError):
        cli.resolve_threads(0)


def test_pmap_preserves_order():
    items = [9.0, 1.0, 4.0, 16.0]
    assert cli.pmap(math.sqrt, items, 1) == [3.0, 1.0, 2.0, 4.0]
    assert cli.pmap(math.sqrt, items, 2) == [3.0, 1.0, 2.0, 4.0]


def test_number_format():
    assert cli.fmt(1.0 / 3.0) == "0.333333333333"
    assert cli.fmt(2) == "2"
    assert cli.fmt(1.23456789012345e-20) == "1.23456789012e-20"


# -- commands ------------------------------------------------------------------------

def test_nmax_table(tmp_path):
    assert _run(tmp_path, "nmax-table", {"schema": 1, "ratios": [2, 10]}) == 0
    rows = _read_csv(tmp_path / "out" / "nmax_table.csv")
    assert rows[0] == ["ratio", "n_max"]
    assert rows[1] == ["2", "1.44231017928"]
    assert float(rows[2][1]) == pytest.approx(114.849730546, rel=1e-11)


def test_pgf_eval(tmp_path):
    cfg = {"schema": 1, "ratio": 10, "mean_N": 0.1, "y_values": [0.0, 1.0]}
    assert _run(tmp_path, "pgf-eval", cfg) == 0
    rows = _read_csv(tmp_path / "out" / "pgf_eval.csv")
    assert rows[0] == ["y_A", "y_B", "g"]
    assert rows[-1] == ["1", "1", "1"]


def test_oracle_compare_band(tmp_path):
    cfg = {"schema": 1, "mean_N": 0.1, "y_points": 2}
    assert _run(tmp_path, "oracle-compare", cfg) == 0
    report = json.loads((tmp_path / "out" / "oracle_compare.json").read_text())
    assert report["passed"] and report["max_rel_err"] < 1e-3
    assert len(report["entries"]) == 4
    # an impossible band fails with exit code 1 unless the run is exploratory
    assert _run(tmp_path, "oracle-compare", cfg, "--tolerance", "1e-12") == 1
    cfg["exploratory"] = True
    assert _run(tmp_path, "oracle-compare", cfg, "--tolerance", "1e-12") == 0
    report = json.loads((tmp_path / "out" / "oracle_compare.json").read_text())
    assert report["flagged"] and not report["passed"]


def test_oracle_compare_grid_limit(tmp_path):
    cfg = {"schema": 1, "mean_N": 0.1, "y_points": 2, "max_grid": 100}
    assert _run(tmp_path, "oracle-compare", cfg) == 2


@pytest.mark.slow
def test_fig_detuning_and_visibility(tmp_path):
    cfg = {"schema": 1, "phases": [0.0, math.pi], "detunings": [0.0]}
    assert _run(tmp_path, "fig-detuning", cfg, "--threads", "2") == 0
    rows = _read_csv(tmp_path / "out" / "fig_detuning.csv")
    assert rows[0] == ["detuning_over_dt", "phi", "p_one_pair", "p_multi"]
    p0, ppi = float(rows[1][2]), float(rows[2][2])
    assert p0 > ppi
    cfg = {"schema": 1, "mean_N_values": [1.0], "detunings": [0.0], "crossings": False}
    assert _run(tmp_path, "fig-visibility", cfg) == 0
    rows = _read_csv(tmp_path / "out" / "fig_visibility.csv")
    assert float(rows[1][2]) == pytest.approx((p0 - ppi) / (p0 + ppi), rel=1e-9)


@pytest.mark.slow
def test_fig_disjoint(tmp_path):
    cfg = {"schema": 1, "delta_ratios": [0.1]}
    assert _run(tmp_path, "fig-disjoint", cfg) == 0
    rows = _read_csv(tmp_path / "out" / "fig_disjoint.csv")
    assert rows[0] == ["delta_ratio", "p_uncorrelated", "p_total"]
    assert float(rows[1][2]) == pytest.approx(0.144790381011, rel=1e-7)


def test_console_entry_point(tmp_path):
    path = _write(tmp_path, {"schema": 1, "ratios": [3]})
    res = subprocess.run([sys.executable, "-m", "biphoton.cli", "nmax-table", "--config", path,
                          "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.strip() == "3,4.34665588903"
