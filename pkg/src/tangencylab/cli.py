"""Command-line front end: ``lab run`` and ``lab sweep``.

Exit codes: 0 when every check in the report passes, 2 when some check
fails, 1 on invalid input.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import cocycle as cc
from . import paths as pp
from . import transitions as tp
from . import unfolding as uf
from .errors import ConfigInvalid, InvalidModel, LabError
from .sampling import random_diagonalizable_cocycle

EXIT_OK, EXIT_INPUT, EXIT_FAIL = 0, 1, 2

_NUM = {"type": "number"}
_MATRIX = {"type": "array", "minItems": 2, "maxItems": 3,
           "items": {"type": "array", "minItems": 2, "maxItems": 3, "items": _NUM}}
_VECTORS = {"type": "array", "minItems": 1, "items": {"type": "array", "items": _NUM}}
_LINE = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 3, "maxItems": 3, "items": _NUM}}
_MODEL = {
    "type": "object",
    "required": ["lambda", "lambda_tilde", "mu", "p", "q", "a", "b", "c", "N", "eps_box"],
    "additionalProperties": False,
    "properties": {k: _NUM for k in ("lambda", "lambda_tilde", "mu", "p", "q", "a", "b", "c", "eps_box")}
    | {"N": {"type": "integer", "minimum": 2}},
}
_NONNEG = {"type": "integer", "minimum": 0}
_POS = {"type": "integer", "minimum": 1}

PARAM_SCHEMAS = {
    "cocycle-check": {
        "type": "object",
        "required": ["maps"],
        "additionalProperties": False,
        "properties": {
            "maps": {"type": "array", "minItems": 1, "items": _MATRIX},
            "base": _NONNEG,
            "n_max": _POS,
            "splitting": {
                "type": "object", "required": ["F", "G"], "additionalProperties": False,
                "properties": {"F": {"type": "array", "items": _VECTORS},
                               "G": {"type": "array", "items": _VECTORS}},
            },
            "dichotomy": {
                "type": "object", "required": ["E1", "E2", "E3"], "additionalProperties": False,
                "properties": {"E1": _LINE, "E2": _LINE, "E3": _LINE},
            },
            "random_instances": _NONNEG,
            "expect": {
                "type": "object", "additionalProperties": False,
                "properties": {"dominated": {"type": "boolean"},
                               "min_domination_time": {"type": ["integer", "null"]}},
            },
        },
    },
    "path-trace": {
        "type": "object",
        "required": ["maps", "eps"],
        "additionalProperties": False,
        "properties": {
            "maps": {"type": "array", "minItems": 1, "items": _MATRIX},
            "x_index": _NONNEG,
            "eps": {"type": "number", "exclusiveMinimum": 0},
            "samples": {"type": "integer", "minimum": 2},
        },
    },
    "transition-product": {
        "type": "object",
        "required": ["lambdas", "mus"],
        "additionalProperties": False,
        "properties": {
            "lambdas": {"type": "array", "minItems": 3, "maxItems": 3, "items": _NUM},
            "mus": {"type": "array", "minItems": 3, "maxItems": 3, "items": _NUM},
            "n": _NONNEG,
            "n_values": {"type": "array", "items": _NONNEG},
        },
    },
    "unfolding-verify": {
        "type": "object",
        "required": ["model"],
        "additionalProperties": False,
        "properties": {"model": _MODEL, "n": _POS, "n_max": _POS},
    },
    "unfolding-sweep": {
        "type": "object",
        "required": ["model"],
        "additionalProperties": False,
        "properties": {
            "model": _MODEL,
            "n_min": _POS,
            "n_max": _NONNEG,
            "grid": {"type": "object", "additionalProperties": {"type": "array", "items": _NUM}},
        },
    },
}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["kind", "params"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": sorted(PARAM_SCHEMAS)},
        "params": {"type": "object"},
        "output": {"type": "string"},
    },
}


def _validate(instance, schema, where: str):
    err = jsonschema.exceptions.best_match(jsonschema.Draft7Validator(schema).iter_errors(instance))
    if err is not None:
        field = "/".join(str(p) for p in err.absolute_path)
        loc = f"{where}.{field.replace('/', '.')}" if field else where
        raise ConfigInvalid(f"{loc}: {err.message}")


def load_scenario(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"config {path} is not valid JSON: {exc.msg} (line {exc.lineno})") from None
    _validate(data, SCENARIO_SCHEMA, "config")
    _validate(data["params"], PARAM_SCHEMAS[data["kind"]], "params")
    return data


def horizon(params: dict, override: int | None) -> int:
    if override is not None:
        return override
    if "n_max" in params:
        return int(params["n_max"])
    try:
        n = uf.default_n_max()
    except ValueError:
        raise ConfigInvalid("LAB_N_MAX must be an integer") from None
    if n < 1:
        raise ConfigInvalid("LAB_N_MAX must be positive")
    return n


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _model(params: dict, where: str = "params.model") -> uf.UnfoldingModel:
    try:
        m = uf.UnfoldingModel.from_dict(params["model"])
    except InvalidModel as exc:
        raise ConfigInvalid(f"{where}: {exc}") from None
    rep = uf.validate_model(m)
    if not rep.valid:
        raise ConfigInvalid(f"{where}: " + "; ".join(rep.errors))
    return m


def _cocycle(params: dict) -> cc.PeriodicCocycle:
    try:
        return cc.PeriodicCocycle.from_json(params["maps"])
    except (ValueError, LabError) as exc:
        raise ConfigInvalid(f"params.maps: {exc}") from None


def _spectrum_dict(spec) -> dict:
    return {"eigenvalues": [[z.real, z.imag] for z in spec.eigenvalues],
            "moduli": list(spec.moduli), "determinant": spec.determinant}


def _check(name: str, ok, detail="") -> dict:
    return {"name": name, "passed": bool(ok), "detail": detail}


def run_cocycle_check(params: dict, n_max: int, seed: int) -> tuple[dict, dict]:
    c = _cocycle(params)
    base = params.get("base", 0)
    if base >= c.period:
        raise ConfigInvalid(f"params.base: {base} outside orbit of period {c.period}")
    spec = cc.return_spectrum(c, base)
    checks = []
    prod = np.prod(spec.eigenvalues)
    checks.append(_check("spectrum_product_is_det",
                         abs(prod - spec.determinant) <= 1e-10 * max(1.0, abs(spec.determinant)),
                         f"product {prod!r}, det {spec.determinant!r}"))
    report = {
        "period": c.period, "dim": c.dim, "base": base,
        "return_spectrum": _spectrum_dict(spec),
        "jacobian": cc.jacobian(c, base),
        "bound_constant": cc.bound_constant(c),
        "hyperbolic": spec.is_hyperbolic(),
        "n_max": n_max,
    }
    if "splitting" in params:
        try:
            s = cc.SplittingCandidate(tuple(params["splitting"]["F"]), tuple(params["splitting"]["G"]))
            t = cc.min_domination_time(c, s, n_max)
        except (ValueError, LabError) as exc:
            raise ConfigInvalid(f"params.splitting: {exc}") from None
        report["min_domination_time"] = t
        report["dominated"] = t is not None
        expect = params.get("expect", {})
        if "dominated" in expect:
            checks.append(_check("expected_dominated", (t is not None) == expect["dominated"], f"time {t}"))
        if "min_domination_time" in expect:
            checks.append(_check("expected_min_time", t == expect["min_domination_time"], f"time {t}"))
    if "dichotomy" in params:
        d = params["dichotomy"]
        try:
            rep = cc.domination_dichotomy(c, d["E1"], d["E2"], d["E3"], n_max)
        except (ValueError, LabError) as exc:
            raise ConfigInvalid(f"params.dichotomy: {exc}") from None
        report["dichotomy"] = rep.to_dict()
        checks.append(_check("dichotomy", rep.implication_holds))
    k = params.get("random_instances", 0)
    if k:
        rng = np.random.default_rng(seed)
        held = 0
        for _ in range(k):
            rc, lines = random_diagonalizable_cocycle(rng)
            held += cc.domination_dichotomy(rc, *lines, n_max=n_max).implication_holds
        report["random_dichotomy"] = {"seed": seed, "instances": k, "held": held}
        checks.append(_check("random_dichotomy", held == k, f"{held}/{k}"))
    report["checks"] = checks
    return report, {}


def run_path_trace(params: dict, n_max: int, seed: int) -> tuple[dict, dict]:
    c = _cocycle(params)
    if c.dim != 2:
        raise ConfigInvalid("params.maps: path-trace needs 2x2 matrices")
    x = params.get("x_index", 0)
    if x >= c.period:
        raise ConfigInvalid(f"params.x_index: {x} outside orbit of period {c.period}")
    eps = float(params["eps"])
    samples = params.get("samples", 1000)
    try:
        path = pp.build_rotation_path(c, x, eps)
    except LabError as exc:
        raise ConfigInvalid(f"params.maps: {type(exc).__name__}: {exc}") from None
    trace = pp.trace_path(path, samples)
    contract = pp.verify_path_contract(path, eps, samples)
    theta_gap = float(np.max(np.abs(trace.theta - trace.theta_trace)))
    checks = [_check(k, v) for k, v in contract.to_dict().items()
              if k in ("starts_at_base", "diameter_ok", "det_constant", "monotone", "complex_at_end")]
    checks.append(_check("theta_closed_form", theta_gap <= 1e-10, f"max gap {theta_gap!r}"))
    report = {
        "x_index": x, "eps": eps, "samples": samples,
        "alpha": path.alpha, "rotation_sign": path.rotation_sign,
        "perturbed_index": path.perturbed_index,
        "contract": contract.to_dict(),
        "first_complex_t": float(trace.t[np.argmax(trace.is_complex)]) if trace.is_complex.any() else None,
        "checks": checks,
    }
    return report, {"trace": trace.to_csv()}


def run_transition_product(params: dict, n_max: int, seed: int) -> tuple[dict, dict]:
    try:
        ts = tp.TransitionSystem(tuple(params["lambdas"]), tuple(params["mus"]))
    except ValueError as exc:
        raise ConfigInvalid(f"params.lambdas/mus: {exc}") from None
    if "n_values" in params:
        ns = list(params["n_values"])
    elif "n" in params:
        ns = [params["n"]]
    else:
        ns = list(range(0, 21))
    entries, checks = [], []
    for n in ns:
        h = tp.verify_homothety(ts, n)
        w = tp.non_power_witness(ts, n)
        entries.append({"homothety": h.to_dict(), "non_power": w.to_dict()})
        checks.append(_check(f"homothety_n{n}", h.passed))
    report = {"system": ts.to_dict(), "index_threshold": tp.index_threshold(ts),
              "det_threshold": tp.det_threshold(ts), "reports": entries, "checks": checks}
    return report, {}


def run_unfolding_verify(params: dict, n_max: int, seed: int) -> tuple[dict, dict]:
    m = _model(params)
    rep = uf.validate_model(m)
    admissible = [n for n in range(1, n_max + 1) if uf.is_admissible(m, n)]
    n_min = uf.min_n_index_two(m, n_max)
    report = {"model": m.to_dict(), "validation": rep.to_dict(), "n_max": n_max,
              "admissible_n": admissible, "min_n_index_two": n_min}
    checks = [_check("index_two_cycle_exists", n_min is not None)]
    n = params.get("n", n_min)
    if n is not None:
        cyc = uf.verify_cycle(m, n, force=True)
        report["cycle"] = cyc.to_dict()
        checks.append(_check("cycle", cyc.passed, f"n={n}"))
    report["checks"] = checks
    return report, {}


def sweep_rows(params: dict) -> tuple[list[str], list[list[str]]]:
    base = _model(params)
    grid = params.get("grid", {})
    keys = sorted(grid)
    n_lo = params.get("n_min", 1)
    n_hi = params.get("n_max", 20)
    header = keys + list(uf.SWEEP_COLUMNS)
    rows = []
    for combo in itertools.product(*(sorted(grid[k]) for k in keys)):
        try:
            m = base.with_values(**dict(zip(keys, combo)))
        except InvalidModel as exc:
            raise ConfigInvalid(f"params.grid: {exc}") from None
        rep = uf.validate_model(m)
        if not rep.valid:
            raise ConfigInvalid(f"params.grid {dict(zip(keys, combo))}: " + "; ".join(rep.errors))
        for n in range(n_lo, n_hi + 1):
            row = uf.sweep_row(m, n)
            rows.append([_fmt(v) for v in combo] + [_fmt(row[c]) for c in uf.SWEEP_COLUMNS])
    return header, rows


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def run_unfolding_sweep(params: dict, n_max: int, seed: int) -> tuple[dict, dict]:
    header, rows = sweep_rows(params)
    report = {"rows": len(rows), "columns": header, "checks": []}
    return report, {"sweep": _csv_text(header, rows)}


RUNNERS = {
    "cocycle-check": run_cocycle_check,
    "path-trace": run_path_trace,
    "transition-product": run_transition_product,
    "unfolding-verify": run_unfolding_verify,
    "unfolding-sweep": run_unfolding_sweep,
}


def _prefix(scenario: dict, config_path: str, out: str | None) -> str:
    if out:
        return out
    if scenario.get("output"):
        return scenario["output"]
    return str(Path(config_path).with_suffix(""))


def _write(prefix: str, report: dict, tables: dict) -> list[str]:
    written = []
    Path(prefix).parent.mkdir(parents=True, exist_ok=True)
    rpath = f"{prefix}_report.json"
    with open(rpath, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(rpath)
    for name, text in tables.items():
        tpath = f"{prefix}_{name}.csv"
        with open(tpath, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        written.append(tpath)
    return written


def run_scenario(config_path: str, out: str | None = None, seed: int = 0,
                 n_max: int | None = None, require_kind: str | None = None) -> int:
    """Run one scenario file and write its report; returns the exit code."""
    try:
        scenario = load_scenario(config_path)
        if require_kind and scenario["kind"] != require_kind:
            raise ConfigInvalid(f"config.kind: expected {require_kind!r}, got {scenario['kind']!r}")
        params = scenario["params"]
        report, tables = RUNNERS[scenario["kind"]](params, horizon(params, n_max), seed)
    except ConfigInvalid as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except LabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report = {"kind": scenario["kind"], **report}
    report["passed"] = all(c["passed"] for c in report["checks"])
    for path in _write(_prefix(scenario, config_path, out), report, tables):
        print(path)
    failed = [c["name"] for c in report["checks"] if not c["passed"]]
    if failed:
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lab", description="Run cocycle, path, transition and unfolding checks.")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario config")
    run.add_argument("config")
    run.add_argument("--out", help="output path prefix")
    run.add_argument("--seed", type=int, default=0, help="seed for random instances (default 0)")
    run.add_argument("--n-max", type=int, dest="n_max", help="domination/admissibility horizon")
    sw = sub.add_parser("sweep", help="run an unfolding-sweep config and write the CSV")
    sw.add_argument("config")
    sw.add_argument("--out", help="output path prefix")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        if args.n_max is not None and args.n_max < 1:
            print("error: --n-max must be positive", file=sys.stderr)
            return EXIT_INPUT
        return run_scenario(args.config, args.out, args.seed, args.n_max)
    return run_scenario(args.config, args.out, require_kind="unfolding-sweep")


if __name__ == "__main__":
    sys.exit(main())
