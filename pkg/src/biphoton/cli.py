"""Command line harness regenerating the tables and figure data.

Usage::

    biphoton <command> --config cfg.json --out DIR [--tolerance T] [--threads N]

Every config is a JSON object with ``"schema": 1``; unknown keys are
rejected.  Exit codes: 0 success, 1 numeric failure, 2 config error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import coding, intermediate, opcalc, oracle
from . import pgf as _pgf
from .errors import BiphotonError, ConfigError, ContractError, DomainError, NumericError
from .errors import ValidityWarning
from .model import (BiphotonState, EntanglementParams, calibrate_scale,
                    make_gaussian, make_sinc_gaussian, mean_photon_number)

SCHEMA_VERSION = 1

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------

_MODEL_DEFAULT = {"kind": "sinc-gaussian"}

_COMMON = {"schema": SCHEMA_VERSION, "model": _MODEL_DEFAULT}

DEFAULTS = {
    "nmax-table": {"ratios": [2, 3, 4, 5, 7, 10, 15, 20]},
    "fig-disjoint": {
        "mean_N": 2.0,
        "delta_ratios": [1e-4, 0.025, 0.05, 0.075, 0.1, 0.125, 0.15, 0.175, 0.2, 0.225,
                         0.25, 0.275, 0.3],
        "composition": "additive",
    },
    "fig-detuning": {
        "delta_t": 0.4e-12, "Delta_t": 10e-12, "mean_N": 1.0,
        "phases": [0.0, math.pi / 2, math.pi],
        "detunings": [round(0.05 * i, 10) for i in range(25)],
        "window": 4.0,
    },
    "fig-visibility": {
        "delta_t": 0.4e-12, "Delta_t": 10e-12,
        "mean_N_values": [0.01, 0.037, 0.1, 0.3, 1.0],
        "detunings": [round(0.05 * i, 10) for i in range(21)],
        "threshold": coding.VISIBILITY_THRESHOLD,
        "crossings": True,
        "window": 4.0,
    },
    "oracle-compare": {
        "ratio": 10.0, "mean_N": 1.0, "y_points": 5, "per_delta_t": 8, "span": 4.0,
        "max_grid": 2048, "exploratory": False,
    },
    "pgf-eval": {
        "ratio": 10.0, "mean_N": 1.0, "interval": None, "y_values": [0.0, 0.25, 0.5, 0.75, 1.0],
    },
}

#: default value of ``--tolerance`` per command and what it controls
TOLERANCE_DEFAULTS = {
    "nmax-table": 1e-12,       # root-finding tolerance on x~
    "fig-disjoint": 1e-9,      # allowed negative excursion of probabilities
    "fig-detuning": 1e-9,      # allowed negative excursion of p_multi
    "fig-visibility": 1e-3,    # bisection tolerance of the crossing (units of delta_t)
    "oracle-compare": 1e-3,    # relative agreement band
    "pgf-eval": 1e-9,          # allowed deviation of g(1,1) from 1
}


def load_config(path, command: str) -> dict:
    """Read and validate a JSON config; returns it merged with the defaults."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return validate_config(raw, command)


def validate_config(raw, command: str) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if raw.get("schema") != SCHEMA_VERSION:
        raise ConfigError(f'config requires "schema": {SCHEMA_VERSION}')
    allowed = dict(_COMMON)
    allowed.update(DEFAULTS[command])
    unknown = sorted(set(raw) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    cfg = {k: v for k, v in allowed.items()}
    cfg.update(raw)
    _check_model(cfg["model"])
    for key in ("ratios", "delta_ratios", "phases", "detunings", "mean_N_values", "y_values"):
        if key in cfg:
            val = cfg[key]
            if not isinstance(val, list) or not val:
                raise ConfigError(f"'{key}' must be a non-empty list")
            if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in val):
                raise ConfigError(f"'{key}' must contain finite numbers")
    for key in ("delta_t", "Delta_t", "ratio", "window", "span"):
        if key in cfg and not (isinstance(cfg[key], (int, float)) and cfg[key] > 0):
            raise ConfigError(f"'{key}' must be positive")
    for key in ("mean_N",):
        if key in cfg and not (isinstance(cfg[key], (int, float)) and cfg[key] >= 0):
            raise ConfigError(f"'{key}' must be non-negative")
    if "mean_N_values" in cfg and min(cfg["mean_N_values"]) < 0:
        raise ConfigError("'mean_N_values' must be non-negative")
    if "ratios" in cfg and min(cfg["ratios"]) < 2:
        raise ConfigError("'ratios' entries must be >= 2")
    if "delta_ratios" in cfg and not all(0 < r <= 1 for r in cfg["delta_ratios"]):
        raise ConfigError("'delta_ratios' entries must lie in (0, 1]")
    if command == "fig-disjoint" and cfg["composition"] not in ("additive", "product"):
        raise ConfigError("'composition' must be 'additive' or 'product'")
    if command == "oracle-compare":
        for key in ("y_points", "per_delta_t", "max_grid"):
            if not (isinstance(cfg[key], int) and cfg[key] >= 1):
                raise ConfigError(f"'{key}' must be a positive integer")
    if command == "pgf-eval" and cfg["interval"] is not None:
        iv = cfg["interval"]
        if not (isinstance(iv, list) and len(iv) == 2 and iv[0] < iv[1]):
            raise ConfigError("'interval' must be [lo, hi] in units of Delta_t, or null")
    if "y_values" in cfg and not all(0 <= y <= 1 for y in cfg["y_values"]):
        raise ConfigError("'y_values' must lie in [0, 1]")
    return cfg


def _check_model(model):
    if not isinstance(model, dict) or "kind" not in model:
        raise ConfigError("'model' must be an object with a 'kind'")
    kind = model["kind"]
    allowed = {"sinc-gaussian": {"kind"}, "gaussian": {"kind", "chirp", "skew"}}
    if kind not in allowed:
        raise ConfigError(f"unknown model kind {kind!r}")
    extra = set(model) - allowed[kind]
    if extra:
        raise ConfigError(f"unknown model keys: {', '.join(sorted(extra))}")


def _model_spec(model: dict, scale: float):
    if model["kind"] == "sinc-gaussian":
        return ("sinc-gaussian", scale)
    return ("gaussian", scale, float(model.get("chirp", 0.0)), float(model.get("skew", 0.0)))


def _phi_from_spec(spec):
    if spec[0] == "sinc-gaussian":
        return make_sinc_gaussian(spec[1])
    return make_gaussian(spec[1], chirp=spec[2], skew=spec[3])


def _state_from_spec(spec, params: EntanglementParams) -> BiphotonState:
    phi = _phi_from_spec(spec)
    return BiphotonState(params, phi, mean_photon_number(phi, params), None)


def _calibrated_spec(model: dict, mean_N: float, params: EntanglementParams):
    template = _phi_from_spec(_model_spec(model, 1.0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        phi = calibrate_scale(mean_N, params, template)
    rep = opcalc.validity(params, mean_N, phi) if params.ratio >= 2 else None
    if rep is not None and not rep.ok:
        print(f"warning: mean photon number {mean_N:g} is not << n_max={rep.n_max:.4g} "
              f"at ratio {params.ratio:g}", file=sys.stderr)
    return _model_spec(model, phi.scale)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def fmt(x) -> str:
    """Number formatting used in every CSV (12 significant digits)."""
    if isinstance(x, str):
        return x
    return f"{float(x):.12g}"


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def resolve_threads(value) -> int:
    if value is None:
        env = os.environ.get("BIPHOTON_THREADS")
        if env is None or env == "":
            return 1
        value = env
    try:
        n = int(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid thread count {value!r}") from exc
    if n < 1:
        raise ConfigError("thread count must be >= 1")
    return n


def pmap(fn, items, threads: int):
    """Map preserving input order; uses a process pool for ``threads > 1``."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=min(threads, len(items))) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# workers (top level so that they can be pickled)
# ---------------------------------------------------------------------------

def _disjoint_point(args):
    spec, Delta_t, delta_t, composition, tol = args
    params = EntanglementParams(delta_t, Delta_t)
    st = _state_from_spec(spec, params)
    p_unc, p_tot = intermediate.prob_one_each_disjoint(st, composition)
    for p in (p_unc, p_tot):
        if p < -tol or p > 1 + tol:
            raise NumericError(f"probability {p:.3e} outside [0, 1]", achieved=p)
    return p_unc, p_tot


def _detuning_point(args):
    spec, delta_t, Delta_t, window, det, phase, tol = args
    params = EntanglementParams(delta_t, Delta_t)
    st = _state_from_spec(spec, params)
    setup = coding.CodingSetup.from_detuning(det * delta_t, phase)
    I_m = _pgf.Interval(-window * Delta_t, window * Delta_t)
    g = coding.pgf_coding(st, setup, I_m)
    return g.pmf(1, 1), coding.multi_pair_probability(g, tol)


def _visibility_point(args):
    spec, delta_t, Delta_t, window, det = args
    params = EntanglementParams(delta_t, Delta_t)
    st = _state_from_spec(spec, params)
    I_m = _pgf.Interval(-window * Delta_t, window * Delta_t)
    return coding.visibility(st, det * delta_t, I_m)


def _crossing_point(args):
    spec, delta_t, Delta_t, window, threshold, tol = args
    params = EntanglementParams(delta_t, Delta_t)
    st = _state_from_spec(spec, params)
    I_m = _pgf.Interval(-window * Delta_t, window * Delta_t)
    return coding.visibility_crossing(st, threshold, tol, I_m)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_nmax_table(cfg, out: Path, tolerance: float, threads: int) -> int:
    phi = _phi_from_spec(_model_spec(cfg["model"], 1.0))
    rows = [(r, opcalc.n_max(float(r), phi)) for r in cfg["ratios"]]
    write_csv(out / "nmax_table.csv", ["ratio", "n_max"], rows)
    for r, n in rows:
        print(f"{fmt(r)},{fmt(n)}")
    return EXIT_OK


def cmd_fig_disjoint(cfg, out: Path, tolerance: float, threads: int) -> int:
    Delta_t = 1.0
    items = []
    for r in cfg["delta_ratios"]:
        params = EntanglementParams(r * Delta_t, Delta_t)
        spec = _calibrated_spec(cfg["model"], cfg["mean_N"], params)
        items.append((spec, Delta_t, r * Delta_t, cfg["composition"], tolerance))
    res = pmap(_disjoint_point, items, threads)
    rows = [(r, pu, pt) for r, (pu, pt) in zip(cfg["delta_ratios"], res)]
    write_csv(out / "fig_disjoint.csv", ["delta_ratio", "p_uncorrelated", "p_total"], rows)
    return EXIT_OK


def cmd_fig_detuning(cfg, out: Path, tolerance: float, threads: int) -> int:
    params = EntanglementParams(cfg["delta_t"], cfg["Delta_t"])
    spec = _calibrated_spec(cfg["model"], cfg["mean_N"], params)
    grid = [(d, ph) for d in cfg["detunings"] for ph in cfg["phases"]]
    items = [(spec, cfg["delta_t"], cfg["Delta_t"], cfg["window"], d, ph, tolerance)
             for d, ph in grid]
    res = pmap(_detuning_point, items, threads)
    rows = [(d, ph, p1, pm) for (d, ph), (p1, pm) in zip(grid, res)]
    write_csv(out / "fig_detuning.csv", ["detuning_over_dt", "phi", "p_one_pair", "p_multi"], rows)
    return EXIT_OK


def cmd_fig_visibility(cfg, out: Path, tolerance: float, threads: int) -> int:
    params = EntanglementParams(cfg["delta_t"], cfg["Delta_t"])
    specs = {N: _calibrated_spec(cfg["model"], N, params) for N in cfg["mean_N_values"]}
    grid = [(d, N) for N in cfg["mean_N_values"] for d in cfg["detunings"]]
    items = [(specs[N], cfg["delta_t"], cfg["Delta_t"], cfg["window"], d) for d, N in grid]
    res = pmap(_visibility_point, items, threads)
    rows = [(d, N, v) for (d, N), v in zip(grid, res)]
    write_csv(out / "fig_visibility.csv", ["detuning_over_dt", "mean_N", "visibility"], rows)
    if cfg["crossings"]:
        citems = [(specs[N], cfg["delta_t"], cfg["Delta_t"], cfg["window"], cfg["threshold"],
                   tolerance) for N in cfg["mean_N_values"]]
        cres = pmap(_crossing_point, citems, threads)
        report = {
            "threshold": cfg["threshold"],
            "tolerance": tolerance,
            "crossings": [{"mean_N": N, "detuning_over_dt": c}
                          for N, c in zip(cfg["mean_N_values"], cres)],
        }
        write_json(out / "visibility_crossings.json", report)
    return EXIT_OK


def cmd_oracle_compare(cfg, out: Path, tolerance: float, threads: int) -> int:
    params = EntanglementParams.from_ratio(cfg["ratio"])
    spec = _calibrated_spec(cfg["model"], cfg["mean_N"], params)
    st = _state_from_spec(spec, params)
    grid = oracle.TimeGrid.for_params(params, cfg["per_delta_t"], cfg["span"])
    cov = oracle.build_covariance(st, grid, max_m=cfg["max_grid"])
    full = _pgf.Interval.full()
    g = _pgf.pgf_large_joint(st, full)
    ys = np.linspace(0.0, 1.0, cfg["y_points"])
    entries = []
    worst = 0.0
    for yA in ys:
        for yB in ys:
            ga = g(yA, yB)
            go = oracle.fredholm_pgf(cov, full, full, yA, yB)
            rel = abs(ga - go) / go if go > 0 else (0.0 if ga == go else math.inf)
            worst = max(worst, rel)
            entries.append({"y_A": float(yA), "y_B": float(yB), "analytic": ga,
                            "oracle": go, "rel_err": rel})
    passed = worst <= tolerance
    report = {
        "ratio": cfg["ratio"], "mean_N": cfg["mean_N"], "grid_m": grid.m, "grid_h": grid.h,
        "band": tolerance, "max_rel_err": worst, "passed": passed,
        "exploratory": bool(cfg["exploratory"]),
        "flagged": (not passed) and bool(cfg["exploratory"]),
        "entries": entries,
    }
    write_json(out / "oracle_compare.json", report)
    print(f"max relative error {worst:.3e} (band {tolerance:g}): "
          f"{'PASS' if passed else 'FLAGGED' if cfg['exploratory'] else 'FAIL'}")
    if passed or cfg["exploratory"]:
        return EXIT_OK
    return EXIT_NUMERIC


def cmd_pgf_eval(cfg, out: Path, tolerance: float, threads: int) -> int:
    params = EntanglementParams.from_ratio(cfg["ratio"])
    spec = _calibrated_spec(cfg["model"], cfg["mean_N"], params)
    st = _state_from_spec(spec, params)
    iv = cfg["interval"]
    interval = (_pgf.Interval.full() if iv is None
                else _pgf.Interval(iv[0] * params.Delta_t, iv[1] * params.Delta_t))
    g = _pgf.pgf_large_joint(st, interval)
    if abs(g(1.0, 1.0) - 1.0) > tolerance:
        raise NumericError("g(1,1) deviates from 1")
    rows = [(yA, yB, g(yA, yB)) for yA in cfg["y_values"] for yB in cfg["y_values"]]
    write_csv(out / "pgf_eval.csv", ["y_A", "y_B", "g"], rows)
    return EXIT_OK


COMMANDS = {
    "nmax-table": cmd_nmax_table,
    "fig-disjoint": cmd_fig_disjoint,
    "fig-detuning": cmd_fig_detuning,
    "fig-visibility": cmd_fig_visibility,
    "oracle-compare": cmd_oracle_compare,
    "pgf-eval": cmd_pgf_eval,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="biphoton", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="JSON config file")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--tolerance", type=float, default=None,
                    help="numeric tolerance (meaning depends on the command)")
    ap.add_argument("--threads", default=None,
                    help="worker processes (default: $BIPHOTON_THREADS or 1)")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config, args.command)
        threads = resolve_threads(args.threads)
        tol = TOLERANCE_DEFAULTS[args.command] if args.tolerance is None else args.tolerance
        if not (tol > 0 and math.isfinite(tol)):
            raise ConfigError("--tolerance must be positive")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out, tol, threads)
    except (ConfigError, DomainError, ContractError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BiphotonError as exc:  # pragma: no cover - other library errors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
