"""Command-line experiment runner.

Verbs
-----
``presets``   list presets and their default parameters
``run``       run one preset or explicit experiment
``sweep``     Cartesian parameter sweep over a bounded process pool
``compare``   row-wise bound-versus-measurement verdicts

Exit codes: 0 success, 2 validation error, 3 numerical failure,
4 comparison FAIL. Failures print a JSON error object on stderr.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import itertools
import json
import math
import os
import sys
import types
import typing
from pathlib import Path

import numpy as np

from . import __version__
from .experiments import PRESETS, ExperimentResult, Table
from .models import ModelSpec, TruncationSpec, observable
from .propagate import KrylovConvergenceError, expectation_series, initial_state
from .tebd import TebdError, TebdProtocol, run_tebd

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_FAIL = 0, 2, 3, 4
ENV_OUTPUT = "LGTRUNC_OUTPUT_DIR"
DEFAULT_OUTPUT = "lgtrunc_output"


class ConfigError(ValueError):
    """Configuration rejected before any computation."""


NUMERICAL_ERRORS = (KrylovConvergenceError, TebdError, np.linalg.LinAlgError, ArithmeticError)

# ---------------------------------------------------------------------------
# strict dataclass construction
# ---------------------------------------------------------------------------


def _check_value(name: str, hint, value):
    origin = typing.get_origin(hint)
    if origin in (typing.Union, types.UnionType):
        args = typing.get_args(hint)
        if value is None and type(None) in args:
            return None
        errors = []
        for arg in args:
            if arg is type(None):
                continue
            try:
                return _check_value(name, arg, value)
            except ConfigError as exc:
                errors.append(str(exc))
        raise ConfigError(errors[0] if errors else f"{name}: invalid value {value!r}")
    if dataclasses.is_dataclass(hint):
        if not isinstance(value, dict):
            raise ConfigError(f"{name}: expected an object, got {value!r}")
        return build_dataclass(hint, value, prefix=f"{name}.")
    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{name}: expected true/false, got {value!r}")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name}: expected an integer, got {value!r}")
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(f"{name}: expected a finite number, got {value!r}")
        return float(value)
    if hint is dict:
        if not isinstance(value, dict):
            raise ConfigError(f"{name}: expected an object, got {value!r}")
        return value
    if hint is str:
        if not isinstance(value, str):
            raise ConfigError(f"{name}: expected a string, got {value!r}")
        return value
    if hint is tuple or origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{name}: expected a list, got {value!r}")
        for v in value:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{name}: list entries must be numbers, got {v!r}")
        return tuple(value)
    return value


def build_dataclass(cls, params: dict, prefix: str = ""):
    """Instantiate ``cls`` from ``params``, rejecting unknown keys and wrong types."""
    if not isinstance(params, dict):
        raise ConfigError(f"{prefix or cls.__name__}: expected an object")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(params) - names)
    if unknown:
        raise ConfigError(f"unknown key(s) {[prefix + k for k in unknown]}; allowed: {sorted(names)}")
    kwargs = {k: _check_value(prefix + k, hints[k], v) for k, v in params.items()}
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{prefix or cls.__name__}: {exc}") from exc


def _jsonable(x):
    if dataclasses.is_dataclass(x) and not isinstance(x, type):
        return _jsonable(dataclasses.asdict(x))
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


# ---------------------------------------------------------------------------
# explicit experiments
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class ExplicitConfig:
    """A single model run described without a preset.

    ``method`` is ``exact`` (sparse/dense propagation of the full truncated
    space) or ``tebd`` (chain and Schwinger only). ``observables`` maps
    output names to ``{"tag": ..., **kwargs}`` for exact runs and to
    ``{"obs": ..., "site": ..., "level": ...}`` for TEBD. With ``lam_ref``
    the absolute difference to the reference truncation is reported too.
    """

    model: dict
    truncation: dict
    observables: dict
    method: str = "exact"
    protocol: dict | None = None
    lam_ref: int | None = None
    state: str = "vacuum"


MODEL_KEYS = {"model", "size", "bc", "e_left"}


def _explicit_specs(cfg: ExplicitConfig):
    if not isinstance(cfg.model, dict) or set(cfg.model) - MODEL_KEYS or "model" not in cfg.model:
        raise ConfigError(f"model: expected keys within {sorted(MODEL_KEYS)} including 'model'")
    trunc = build_dataclass(TruncationSpec, cfg.truncation, "truncation.")
    if cfg.method not in ("exact", "tebd"):
        raise ConfigError(f"method must be 'exact' or 'tebd', got {cfg.method!r}")
    if cfg.lam_ref is not None and cfg.lam_ref < trunc.lam:
        raise ConfigError("lam_ref must be >= truncation.lam")
    try:
        spec = ModelSpec(cfg.model["model"], trunc.g, trunc.lam, m=trunc.m, omega=trunc.omega,
                         **{k: v for k, v in cfg.model.items() if k != "model"})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"model: {exc}") from exc
    if not isinstance(cfg.observables, dict) or not cfg.observables:
        raise ConfigError("observables: expected a non-empty object")
    return spec, trunc


def run_explicit(cfg: ExplicitConfig) -> ExperimentResult:
    spec, trunc = _explicit_specs(cfg)
    res = ExperimentResult("explicit", _jsonable(cfg))
    cuts = [trunc.lam] + ([cfg.lam_ref] if cfg.lam_ref is not None else [])
    runs = {}
    for lam in cuts:
        if cfg.method == "exact":
            s = spec.with_lam(lam)
            obs = {}
            for name, desc in cfg.observables.items():
                desc = dict(desc)
                tag = desc.pop("tag", None)
                try:
                    obs[name] = observable(tag, s.basis(), **desc)
                except TypeError as exc:
                    raise ConfigError(f"observables.{name}: {exc}") from exc
            dt = (cfg.protocol or {}).get("dt", 0.01)
            runs[lam] = expectation_series(s.hamiltonian(), initial_state(s, cfg.state), obs, trunc.T, dt)
        else:
            proto = build_dataclass(TebdProtocol, {"T": trunc.T, **(cfg.protocol or {})}, "protocol.")
            size = cfg.model.get("size")
            obs = {name: (d.get("obs"), d.get("site", 0), d.get("level")) for name, d in cfg.observables.items()}
            runs[lam] = run_tebd(spec.model, trunc.g, lam, trunc.T, m=trunc.m, size=size, chi=proto.chi,
                                 protocol=proto, observables=obs)
        res.series[f"series_lam{lam}"] = runs[lam]
    table = Table("summary", ["observable", "lam", "max_value", "t_max", "max_error", "t_error"])
    base = runs[trunc.lam]
    for name in cfg.observables:
        col = base[name]
        i = int(np.argmax(col))
        row = {"observable": name, "lam": trunc.lam, "max_value": float(col[i]), "t_max": float(base.times[i])}
        if cfg.lam_ref is not None:
            err = np.abs(col - runs[cfg.lam_ref][name])
            j = int(np.argmax(err))
            row.update(max_error=float(err[j]), t_error=float(base.times[j]))
        table.add(**row)
    res.tables["summary"] = table
    return res


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

TOP_KEYS = {"preset", "params", "explicit", "sweep", "output_dir"}


def load_config(data) -> dict:
    """Validate the top-level layout; returns it unchanged."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(data) - TOP_KEYS)
    if unknown:
        raise ConfigError(f"unknown top-level key(s) {unknown}; allowed: {sorted(TOP_KEYS)}")
    if ("preset" in data) == ("explicit" in data):
        raise ConfigError("config needs exactly one of 'preset' or 'explicit'")
    if "preset" in data and data["preset"] not in PRESETS:
        raise ConfigError(f"unknown preset {data['preset']!r}; expected one of {sorted(PRESETS)}")
    if "explicit" in data and "params" in data:
        raise ConfigError("'params' belongs to presets; put explicit settings under 'explicit'")
    return data


def _set_path(target: dict, path: str, value) -> None:
    keys = path.split(".")
    for k in keys[:-1]:
        nxt = target.get(k)
        if nxt is None:
            nxt = {}
        elif not isinstance(nxt, dict):
            raise ConfigError(f"cannot set {path!r}: {k!r} is not an object")
        target[k] = nxt = dict(nxt)
        target = nxt
    target[keys[-1]] = value


def _resolve(data: dict):
    """``(callable, config object, canonical config dict)`` for a validated config."""
    if "preset" in data:
        cls, fn = PRESETS[data["preset"]]
        params = _jsonable(dataclasses.asdict(cls()))
        for k, v in (data.get("params") or {}).items():
            if isinstance(v, dict) and isinstance(params.get(k), dict):
                params[k] = {**params[k], **v}
            else:
                params[k] = v
        cfg = build_dataclass(cls, params)
        canonical = {"preset": data["preset"], "params": _jsonable(cfg)}
        return fn, cfg, canonical
    cfg = build_dataclass(ExplicitConfig, data["explicit"], "explicit.")
    _explicit_specs(cfg)
    return run_explicit, cfg, {"explicit": _jsonable(cfg)}


def apply_overrides(data: dict, args) -> dict:
    """Fold command-line overrides into a preset or explicit config."""
    data = json.loads(json.dumps(data))
    flags = {"dt": args.dt, "T": args.T}
    tebd = {"chi": args.chi, "chi_step": args.chi_step, "chi_max": args.chi_max,
            "stage_time": args.stage_time, "stage_chi": args.stage_chi}
    sets = [(k, v) for k, v in flags.items() if v is not None]
    sets_tebd = [(k, v) for k, v in tebd.items() if v is not None]
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        sets.append((key, value))
    if "preset" in data:
        cls, _ = PRESETS[data["preset"]]
        names = {f.name for f in dataclasses.fields(cls)}
        params = data.setdefault("params", {})
        for key, value in sets:
            if key == "dt" and "dt" not in names and "tebd" in names:
                key = "tebd.dt"
            if key.split(".")[0] not in names:
                raise ConfigError(f"preset {data['preset']!r} has no parameter {key!r}")
            _set_path(params, key, value)
        if sets_tebd:
            if "tebd" not in names:
                raise ConfigError(f"preset {data['preset']!r} has no bond-dimension schedule")
            for key, value in sets_tebd:
                _set_path(params, f"tebd.{key}", value)
    else:
        exp = data["explicit"]
        for key, value in sets:
            if key == "T":
                _set_path(exp, "truncation.T", value)
            elif key == "dt":
                _set_path(exp, "protocol.dt", value)
            else:
                _set_path(exp, key, value)
        for key, value in sets_tebd:
            _set_path(exp, f"protocol.{'chi' if key == 'chi' else key}", value)
    return data


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _sidecar(path: Path, meta: dict) -> None:
    with open(path.with_suffix(".json"), "w") as fh:
        json.dump(_jsonable(meta), fh, indent=1, sort_keys=True)
        fh.write("\n")


def write_result(result: ExperimentResult, canonical: dict, out: Path) -> list[str]:
    """Write tables, series, plots and provenance; returns the file names."""
    from .svg import render

    out.mkdir(parents=True, exist_ok=True)
    base = {"code_version": __version__, "config": canonical, "experiment": result.name}
    written = []
    for name, table in result.tables.items():
        path = out / f"{name}.csv"
        table.to_csv(path)
        _sidecar(path, {**base, "kind": "table", "columns": table.columns, "table_metadata": table.metadata})
        written.append(path.name)
    for name, ts in result.series.items():
        path = out / f"{name}.csv"
        ts.to_csv(path)
        _sidecar(path, {**base, "kind": "time_series", "series_metadata": ts.metadata})
        written.append(path.name)
    for plot in result.plots:
        path = out / f"{plot.name}.svg"
        path.write_text(render(plot))
        written.append(path.name)
    summary = out / "summary.json"
    with open(summary, "w") as fh:
        json.dump(_jsonable({**base, "summary": result.summary, "files": sorted(written)}), fh, indent=1,
                  sort_keys=True)
        fh.write("\n")
    return written


def _output_dir(args, data) -> Path:
    return Path(args.output_dir or data.get("output_dir") or os.environ.get(ENV_OUTPUT) or DEFAULT_OUTPUT)


def _fail(code: int, kind: str, message: str, **extra) -> int:
    print(json.dumps({"error": kind, "message": message, "exit_code": code, **_jsonable(extra)}), file=sys.stderr)
    return code


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------

VALUE_COLUMNS = ("value", "log10_value")


def _log_values(table: Table) -> list[float]:
    if "log10_value" in table.columns:
        out = []
        for r in table.rows:
            v = r["log10_value"]
            out.append(-math.inf if v in (None, "-inf") else float(v))
        return out
    if "value" in table.columns:
        return [math.log10(r["value"]) if r["value"] and r["value"] > 0 else -math.inf for r in table.rows]
    raise ConfigError(f"{table.name}: needs a 'value' or 'log10_value' column")


def compare_tables(bounds: Table, measured: Table) -> Table:
    """PASS when bound >= measurement on every matching key; slack is log10(bound/measured)."""
    keys_b = [c for c in bounds.columns if c not in VALUE_COLUMNS]
    keys_m = [c for c in measured.columns if c not in VALUE_COLUMNS]
    if keys_b != keys_m:
        raise ConfigError(f"key columns differ: {keys_b} vs {keys_m}")

    def key(row):
        return tuple(row[k] for k in keys_b)

    lb = {key(r): v for r, v in zip(bounds.rows, _log_values(bounds))}
    lm = {key(r): v for r, v in zip(measured.rows, _log_values(measured))}
    if len(lb) != len(bounds.rows) or len(lm) != len(measured.rows):
        raise ConfigError("duplicate key rows")
    if set(lb) != set(lm):
        missing = sorted(map(str, set(lb) ^ set(lm)))[:5]
        raise ConfigError(f"key sets differ, e.g. {missing}")
    verdict = Table("verdict", keys_b + ["log10_bound", "log10_measured", "log10_slack", "verdict"])
    for r in measured.rows:
        k = key(r)
        b, m = lb[k], lm[k]
        slack = b - m
        if math.isnan(slack):  # both zero
            slack = 0.0
        verdict.add(**dict(zip(keys_b, k)), log10_bound=b, log10_measured=m, log10_slack=slack,
                    verdict="PASS" if b >= m else "FAIL")
    return verdict


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def sweep_points(data: dict) -> list[dict]:
    grid = data.get("sweep")
    if not isinstance(grid, dict) or not grid:
        raise ConfigError("sweep needs a non-empty 'sweep' object of parameter lists")
    for k, v in grid.items():
        if not isinstance(v, list) or not v:
            raise ConfigError(f"sweep.{k}: expected a non-empty list")
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def _point_config(data: dict, point: dict) -> dict:
    cfg = json.loads(json.dumps({k: v for k, v in data.items() if k not in ("sweep", "output_dir")}))
    for key, value in point.items():
        _set_path(cfg.setdefault("params", {}) if "preset" in cfg else cfg["explicit"], key, value)
    return cfg


def _run_point(args):
    index, cfg, out = args
    try:
        fn, obj, canonical = _resolve(cfg)
        result = fn(obj)
        write_result(result, canonical, Path(out))
        return index, "ok", "", _headline(result)
    except ConfigError as exc:
        return index, "validation_error", str(exc), {}
    except NUMERICAL_ERRORS as exc:
        return index, "numerical_error", f"{type(exc).__name__}: {exc}", {}
    except Exception as exc:  # isolate the point; the sweep carries on
        return index, "error", f"{type(exc).__name__}: {exc}", {}


def _headline(result: ExperimentResult) -> dict:
    out = {k: v for k, v in result.summary.items() if isinstance(v, (int, float, str, bool)) or v is None}
    pairs = [n[: -len("_bound")] for n in result.tables if n.endswith("_bound")
             and f"{n[: -len('_bound')]}_measured" in result.tables]
    for stem in pairs:
        v = compare_tables(result.tables[f"{stem}_bound"], result.tables[f"{stem}_measured"])
        out[f"{stem}_all_pass"] = all(r["verdict"] == "PASS" for r in v.rows)
        out[f"{stem}_min_slack"] = min(r["log10_slack"] for r in v.rows) if v.rows else None
    return out


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------

def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


def cmd_presets(args) -> int:
    listing = {name: {"doc": (fn.__doc__ or "").strip().splitlines()[0],
                      "params": _jsonable(dataclasses.asdict(cls()))}
               for name, (cls, fn) in PRESETS.items()}
    print(json.dumps(listing, indent=1, sort_keys=True))
    return EXIT_OK


def cmd_run(args) -> int:
    if args.config:
        data = _read_json(args.config)
        if args.preset and data.get("preset") != args.preset:
            raise ConfigError("preset argument and config file disagree")
    elif args.preset:
        data = {"preset": args.preset}
    else:
        raise ConfigError("run needs a preset name or --config")
    data = apply_overrides(load_config(data), args)
    if "sweep" in data:
        raise ConfigError("config has a 'sweep' section; use the sweep verb")
    fn, obj, canonical = _resolve(data)
    out = _output_dir(args, data)
    if "preset" in data:
        out = out / data["preset"]
    result = fn(obj)
    files = write_result(result, canonical, out)
    print(json.dumps({"status": "ok", "output_dir": str(out), "files": sorted(files),
                      "summary": _jsonable(result.summary)}, sort_keys=True))
    return EXIT_OK


def cmd_sweep(args) -> int:
    data = apply_overrides(load_config(_read_json(args.config)), args)
    points = sweep_points(data)
    out = _output_dir(args, data)
    configs = [_point_config(data, p) for p in points]
    for c in configs:  # schema errors surface before any computation
        _resolve(c)
    jobs = [(i, c, str(out / f"point_{i:03d}")) for i, c in enumerate(configs)]
    workers = max(1, int(args.workers or 1))
    if workers == 1:
        results = [_run_point(j) for j in jobs]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_point, jobs))
    results.sort(key=lambda r: r[0])
    metric_cols = sorted({k for r in results for k in r[3]})
    table = Table("sweep", ["point", *points[0].keys(), "status", "message", *metric_cols])
    for (i, status, message, metrics), p in zip(results, points):
        table.add(point=i, **{k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in p.items()},
                  status=status, message=message, **metrics)
    out.mkdir(parents=True, exist_ok=True)
    table.to_csv(out / "sweep.csv")
    _sidecar(out / "sweep.csv", {"code_version": __version__, "config": data, "kind": "sweep"})
    failed = [r for r in results if r[1] != "ok"]
    print(json.dumps({"status": "ok" if not failed else "partial", "points": len(points),
                      "failed": [r[0] for r in failed], "output_dir": str(out)}, sort_keys=True))
    return EXIT_OK if not failed else EXIT_NUMERICAL


def cmd_compare(args) -> int:
    try:
        bounds = Table.from_csv(args.bounds)
        measured = Table.from_csv(args.measured)
    except OSError as exc:
        raise ConfigError(str(exc)) from exc
    verdict = compare_tables(bounds, measured)
    if args.output:
        verdict.to_csv(args.output)
        _sidecar(Path(args.output), {"code_version": __version__, "kind": "verdict",
                                     "bounds": str(args.bounds), "measured": str(args.measured)})
    fails = [r for r in verdict.rows if r["verdict"] == "FAIL"]
    w = sys.stdout
    w.write(",".join(verdict.columns) + "\n")
    for r in verdict.rows:
        w.write(",".join(str(r[c]) for c in verdict.columns) + "\n")
    w.write(f"# {len(verdict.rows) - len(fails)} PASS, {len(fails)} FAIL\n")
    return EXIT_FAIL if fails else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lgtrunc", description="Truncation-error experiments for lattice gauge theories.")
    p.add_argument("--version", action="version", version=f"lgtrunc {__version__}")
    sub = p.add_subparsers(dest="verb", required=True)

    def overrides(sp):
        sp.add_argument("--output-dir", help=f"output directory (default ${ENV_OUTPUT} or ./{DEFAULT_OUTPUT})")
        sp.add_argument("--dt", type=float)
        sp.add_argument("--T", type=float, help="final time")
        sp.add_argument("--chi", type=int, help="starting bond dimension")
        sp.add_argument("--chi-step", type=int)
        sp.add_argument("--chi-max", type=int)
        sp.add_argument("--stage-time", type=float, help="time until which --stage-chi caps the bond dimension")
        sp.add_argument("--stage-chi", type=int)
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a parameter (dotted path, JSON value); repeatable")

    sub.add_parser("presets", help="list presets with default parameters")
    run = sub.add_parser("run", help="run a preset or an explicit config")
    run.add_argument("preset", nargs="?", choices=sorted(PRESETS))
    run.add_argument("--config", help="JSON config file")
    overrides(run)
    sweep = sub.add_parser("sweep", help="run a parameter sweep")
    sweep.add_argument("config", help="JSON config file with a 'sweep' section")
    sweep.add_argument("--workers", type=int, default=1)
    overrides(sweep)
    cmp_ = sub.add_parser("compare", help="bound vs measurement verdicts")
    cmp_.add_argument("bounds")
    cmp_.add_argument("measured")
    cmp_.add_argument("--output", help="write the verdict table as CSV")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            return EXIT_OK
        return _fail(EXIT_VALIDATION, "validation", "invalid command line")
    handler = {"presets": cmd_presets, "run": cmd_run, "sweep": cmd_sweep, "compare": cmd_compare}[args.verb]
    try:
        return handler(args)
    except ConfigError as exc:
        return _fail(EXIT_VALIDATION, "validation", str(exc))
    except KeyError as exc:
        return _fail(EXIT_VALIDATION, "validation", str(exc))
    except NUMERICAL_ERRORS as exc:
        return _fail(EXIT_NUMERICAL, "numerical", f"{type(exc).__name__}: {exc}")
    except ValueError as exc:
        return _fail(EXIT_VALIDATION, "validation", str(exc))
    except RuntimeError as exc:
        return _fail(EXIT_NUMERICAL, "numerical", f"{type(exc).__name__}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
