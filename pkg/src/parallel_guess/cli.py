"""Command-line interface: ``parallel-guess {alpha,beta,usum,simulate,sweep,validate}``.

Machine formats (json, csv) print floats with 17 significant digits; the
human table uses 6.  Exit status: 0 ok, 2 usage error, 3 domain error,
4 validation failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import asymptotic as asym
from . import exact
from .errors import ModelError
from .model import validate
from .simulate import (
    PARALLEL,
    SERIAL,
    SERIAL_CAP,
    empirical_cdf_check,
    serial_mean_exact,
    simulate_parallel,
    simulate_serial,
)
from .validation import run_checks

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_VALIDATION = 0, 2, 3, 4
MAX_CELLS = 10_000

ALPHA_METHODS = {
    "survival": exact.SURVIVAL,
    "exact-rational": exact.ALTERNATING_EXACT,
    "alternating-float": exact.ALTERNATING_FLOAT,
    "knuth-identity": exact.KNUTH_IDENTITY,
    "asymptotic": exact.ASYMPTOTIC,
    "simple": exact.SIMPLE,
}

COLUMNS = {
    "alpha": ("k", "l", "method", "value", "rational", "error_bound", "cancellation_ratio",
              "log10_cancellation_ratio", "wall_ms", "consistency"),
    "beta": ("k", "l", "leading", "beta_value", "beta_constant", "beta_fluctuation",
             "beta_difference", "amplitude", "total", "simple", "residual_order"),
    "usum": ("m", "n", "method", "value", "rational", "wall_ms"),
    "simulate": ("k", "l", "model", "trials", "seed", "mean", "std_error", "min_rounds",
                 "max_rounds", "analytic_mean", "log10_analytic_mean", "z_score",
                 "chi2_statistic", "chi2_dof", "chi2_p_value"),
    "sweep": ("k", "l", "leading", "beta_constant", "beta_fluctuation", "asymptotic_total",
              "exact", "exact_error_bound", "residual", "residual_times_l"),
    "validate": ("check", "passed", "measured", "tolerance", "elapsed_ms", "detail"),
}

DEFAULTS = {
    "k": None, "l": None, "method": None, "tol": 1e-12, "trials": 100_000, "seed": 0,
    "format": "table", "out": None, "cap": None, "m": None, "n": None, "model": PARALLEL,
    "workers": 1, "check": False, "l_range": None, "max_cells": MAX_CELLS,
    "quick": False, "perturb_gamma": 0.0,
}


class UsageError(Exception):
    code = "usage"


# -- parsing helpers -------------------------------------------------------

def _number(text, flag: str = "value"):
    if text is None:
        raise UsageError(f"missing required {flag}")
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return text
    text = str(text).strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return Fraction(text) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"{flag} must be a number, got {text!r}") from None


def _number_list(value) -> list:
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        return [_number(v) for v in value]
    return [_number(v, "grid value") for v in str(value).split(",") if v.strip()]


def _geometric_range(spec: str) -> list[int]:
    try:
        lo, hi, count = spec.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError:
        raise UsageError(f"--l-range wants start:stop:count, got {spec!r}") from None
    if count < 1 or lo < 1 or hi < lo:
        raise UsageError(f"bad --l-range {spec!r}")
    return sorted({int(round(v)) for v in np.geomspace(lo, hi, count)})


def _methods(value) -> list[str]:
    names = value if isinstance(value, list) else [v.strip() for v in str(value).split(",") if v.strip()]
    if not names:
        raise UsageError("method set must be non-empty")
    unknown = [n for n in names if n not in ALPHA_METHODS]
    if unknown:
        raise UsageError(f"unknown method(s) {unknown}; choose from {sorted(ALPHA_METHODS)}")
    return names


# -- output ----------------------------------------------------------------

def _g17(v: float) -> str:
    text = format(v, "#.17g")
    return text + "0" if text.endswith(".") else text


def _json_value(v) -> str:
    if v is None or isinstance(v, bool):
        return json.dumps(v)
    if isinstance(v, float):
        return _g17(v) if math.isfinite(v) else "null"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    return json.dumps(str(v))


def _cell(v, digits: int) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _g17(v) if digits == 17 and math.isfinite(v) else format(v, f".{digits}g")
    return str(v)


def _short(text: str, width: int = 100) -> str:
    if len(text) <= width:
        return text
    return f"<{len(text)} chars>"


def render(payload: dict, fmt: str, columns: tuple) -> str:
    table = payload.get("checks") if payload["command"] == "validate" else payload["rows"]
    if fmt == "json":
        return _json_value(payload) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(columns)
        for row in table:
            w.writerow([_cell(row.get(c), 17) for c in columns])
        return buf.getvalue()
    cells = [[_short(_cell(row.get(c), 6)) for c in columns] for row in table]
    widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip()]
    lines += ["  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in cells]
    return "\n".join(lines) + "\n"


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, list):
        return [_jsonable(x) for x in v]
    return v


# -- commands --------------------------------------------------------------

def _timed(fn, *a, **kw):
    t0 = time.perf_counter()
    out = fn(*a, **kw)
    return out, (time.perf_counter() - t0) * 1e3


def _alpha_estimate(name: str, params, cfg):
    cap = cfg["cap"] or exact.EXACT_CAP
    if name == "survival":
        return exact.mean_rounds_survival(params, cfg["tol"])
    if name == "exact-rational":
        return exact.exact_estimate(exact.mean_rounds_alternating_exact(params, cap), exact.ALTERNATING_EXACT)
    if name == "knuth-identity":
        return exact.exact_estimate(exact.mean_rounds_knuth(params, cap), exact.KNUTH_IDENTITY)
    if name == "alternating-float":
        return exact.mean_rounds_alternating_float(params)
    amp = asym.oscillation_amplitude(params.alphabet_size)
    if name == "asymptotic":
        return asym.mean_rounds_asymptotic(params).to_estimate(params, amp)
    return asym.simple_estimate(params, amp)


def cmd_alpha(cfg) -> tuple[list, None]:
    params = validate(_number(cfg["k"], "--k"), _number(cfg["l"], "--l"))
    methods = _methods("survival,asymptotic,simple" if cfg["method"] is None else cfg["method"])
    rows, estimates = [], []
    for name in methods:
        est, ms = _timed(_alpha_estimate, name, params, cfg)
        estimates.append(est)
        rows.append({
            "k": params.alphabet_size, "l": params.word_length, "method": name,
            "value": est.value,
            "rational": str(est.exact) if est.exact is not None else None,
            "error_bound": est.error_bound,
            "cancellation_ratio": est.cancellation_ratio,
            "log10_cancellation_ratio": est.log10_cancellation_ratio,
            "wall_ms": ms,
        })
    ref = next((e for e in estimates if e.exact is not None), None)
    ref = ref or next((e for e in estimates if e.method == exact.SURVIVAL), None)
    ref = ref or exact.mean_rounds_survival(params, cfg["tol"])
    for row, est in zip(rows, estimates):
        slack = est.error_bound + ref.error_bound + 1e-9 * abs(ref.value)
        row["consistency"] = "ok" if abs(est.value - ref.value) <= slack else "mismatch"
    return rows, None


def cmd_beta(cfg) -> tuple[list, None]:
    K, L = _number(cfg["k"], "--k"), _number(cfg["l"], "--l")
    tol = cfg["tol"] if cfg["tol"] != DEFAULTS["tol"] else 1e-15
    const = asym.beta_constant(K)
    log_x = -math.log1p(-1.0 / float(K))
    fluct = asym.beta_fluctuation(K, float(L), tol)
    integral_l = float(L).is_integer() and L >= 2
    leading = math.log(float(L)) / log_x
    return [{
        "k": K, "l": L, "leading": leading,
        "beta_value": const + fluct, "beta_constant": const, "beta_fluctuation": fluct,
        "beta_difference": asym.beta_difference(K, int(L), tol) if integral_l else None,
        "amplitude": asym.oscillation_amplitude(K, tol),
        "total": leading + (const + fluct),
        "simple": (math.log(float(L)) + asym.EULER_GAMMA) / log_x + 0.5,
        "residual_order": asym.RESIDUAL_ORDER,
    }], None


def cmd_usum(cfg) -> tuple[list, None]:
    if cfg["m"] is None or cfg["n"] is None:
        raise UsageError("usum needs --m and --n")
    m = exact.to_rational(str(cfg["m"]))
    n = int(cfg["n"])
    methods = cfg["method"] or "exact,asymptotic"
    names = methods if isinstance(methods, list) else [v.strip() for v in methods.split(",") if v.strip()]
    rows = []
    for name in names:
        if name == "exact":
            val, ms = _timed(exact.u_sum_exact, m, n, cfg["cap"] or exact.EXACT_CAP)
            rows.append({"m": str(m), "n": n, "method": name, "value": float(val), "rational": str(val), "wall_ms": ms})
        elif name == "asymptotic":
            val, ms = _timed(asym.u_sum_asymptotic, float(m), n)
            rows.append({"m": str(m), "n": n, "method": name, "value": val, "rational": None, "wall_ms": ms})
        else:
            raise UsageError(f"unknown usum method {name!r}; choose exact, asymptotic")
    return rows, None


def cmd_simulate(cfg) -> tuple[list, None]:
    params = validate(_number(cfg["k"], "--k"), _number(cfg["l"], "--l"))
    model = cfg["model"]
    if model == PARALLEL:
        summ = simulate_parallel(params, int(cfg["trials"]), int(cfg["seed"]), workers=int(cfg["workers"]))
        analytic = exact.mean_rounds_survival(params, 1e-12).value
        log10_analytic = math.log10(analytic)
    elif model == SERIAL:
        cap = float(cfg["cap"]) if cfg["cap"] else SERIAL_CAP
        summ = simulate_serial(params, int(cfg["trials"]), int(cfg["seed"]), cap, workers=int(cfg["workers"]))
        log10_analytic = serial_mean_exact(params)
        analytic = 10.0**log10_analytic
    else:
        raise UsageError(f"--model must be parallel or serial, got {model!r}")
    row = {
        "k": params.alphabet_size, "l": params.word_length, "model": summ.model,
        "trials": summ.trials, "seed": summ.seed, "mean": summ.mean, "std_error": summ.std_error,
        "min_rounds": summ.min_rounds, "max_rounds": summ.max_rounds,
        "analytic_mean": analytic, "log10_analytic_mean": log10_analytic,
        "z_score": (summ.mean - analytic) / summ.std_error if summ.std_error > 0 else None,
        "chi2_statistic": None, "chi2_dof": None, "chi2_p_value": None,
    }
    if cfg["check"]:
        rep = empirical_cdf_check(summ, params)
        row.update(chi2_statistic=rep.statistic, chi2_dof=rep.dof, chi2_p_value=rep.p_value)
    row["histogram"] = summ.histogram
    return [row], None


def _sweep_cell(K, L, tol):
    params = validate(K, L)
    br = asym.mean_rounds_asymptotic(params)
    ex = exact.mean_rounds_survival(params, tol)
    resid = ex.value - br.total
    return {
        "k": K, "l": L, "leading": br.leading, "beta_constant": br.beta_constant,
        "beta_fluctuation": br.beta_fluctuation, "asymptotic_total": br.total,
        "exact": ex.value, "exact_error_bound": ex.error_bound,
        "residual": resid, "residual_times_l": resid * L,
    }


def cmd_sweep(cfg) -> tuple[list, None]:
    ks = _number_list(cfg["k"])
    ls = _number_list(cfg["l"])
    if cfg["l_range"]:
        ls = sorted(set(ls) | set(_geometric_range(cfg["l_range"])))
    if not ks or not ls:
        raise UsageError("sweep grid is empty; give --k and --l (or --l-range)")
    cells = [(K, L) for K in ks for L in ls]
    if len(cells) > int(cfg["max_cells"]):
        per = max(1, int(cfg["max_cells"]) // len(ls))
        raise UsageError(
            f"grid has {len(cells)} cells, above the limit {cfg['max_cells']}; "
            f"split --k into chunks of at most {per} values or raise --max-cells"
        )
    for K, L in cells:
        validate(K, L)
    workers = int(cfg["workers"])
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda c: _sweep_cell(c[0], c[1], cfg["tol"]), cells))
    else:
        rows = [_sweep_cell(K, L, cfg["tol"]) for K, L in cells]
    return rows, None


def cmd_validate(cfg) -> tuple[list, list]:
    results = run_checks(quick=bool(cfg["quick"]), perturb_gamma=float(cfg["perturb_gamma"]))
    checks = [
        {"check": r.name, "passed": r.passed, "measured": r.measured, "tolerance": r.tolerance,
         "elapsed_ms": r.elapsed_ms, "detail": r.detail}
        for r in results
    ]
    return [], checks


COMMANDS = {
    "alpha": cmd_alpha, "beta": cmd_beta, "usum": cmd_usum,
    "simulate": cmd_simulate, "sweep": cmd_sweep, "validate": cmd_validate,
}


# -- entry point -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("table", "csv", "json"))
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--params-file", help="JSON run configuration; flags override its values")

    parser = argparse.ArgumentParser(prog="parallel-guess", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("alpha", parents=[common], help="mean rounds by several methods")
    p.add_argument("--k")
    p.add_argument("--l")
    p.add_argument("--method", help=f"comma list from {','.join(ALPHA_METHODS)}")
    p.add_argument("--tol", type=float)
    p.add_argument("--cap", type=int, help="size cap for exact rational routes")

    p = sub.add_parser("beta", parents=[common], help="periodic term and its parts")
    p.add_argument("--k")
    p.add_argument("--l")
    p.add_argument("--tol", type=float)

    p = sub.add_parser("usum", parents=[common], help="radix-exchange sum U(m, n)")
    p.add_argument("--m", help="base m > 1, e.g. 2 or 40/39")
    p.add_argument("--n", type=int)
    p.add_argument("--method", help="comma list from exact,asymptotic")
    p.add_argument("--cap", type=int)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo rounds")
    p.add_argument("--k")
    p.add_argument("--l")
    p.add_argument("--model", choices=(PARALLEL, SERIAL))
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--cap", type=float, help="largest K**L the serial model will attempt")
    p.add_argument("--check", action="store_const", const=True, help="chi-square test against the exact pmf")

    p = sub.add_parser("sweep", parents=[common], help="asymptotic vs exact over a (K, L) grid")
    p.add_argument("--k", help="comma list of alphabet sizes")
    p.add_argument("--l", help="comma list of word lengths")
    p.add_argument("--l-range", help="geometric spacing start:stop:count")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-cells", type=int)
    p.add_argument("--workers", type=int)

    p = sub.add_parser("validate", parents=[common], help="run the cross-route checks")
    p.add_argument("--quick", action="store_const", const=True)
    p.add_argument("--perturb-gamma", type=float, help="fault injection: scale Gamma by 1+eps")
    return parser


def _config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.params_file:
        try:
            with open(args.params_file) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read params file: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("params file must hold a JSON object")
        if data.get("command", args.command) != args.command:
            raise UsageError(f"params file is for {data['command']!r}, not {args.command!r}")
        for key, val in data.items():
            key = key.replace("-", "_")
            if key in cfg:
                cfg[key] = val
            elif key not in ("command", "params_file"):
                raise UsageError(f"unknown params-file key {key!r}")
    for key, val in vars(args).items():
        if key in cfg and val is not None:
            cfg[key] = val
    return cfg


def _emit_error(exc, status: int) -> int:
    err = exc.to_dict() if isinstance(exc, ModelError) else {"code": exc.code, "message": str(exc)}
    sys.stderr.write(_json_value({"error": err}) + "\n")
    return status


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        cfg = _config(args)
        rows, checks = COMMANDS[args.command](cfg)
    except UsageError as exc:
        return _emit_error(exc, EXIT_USAGE)
    except ModelError as exc:
        return _emit_error(exc, EXIT_DOMAIN)
    payload = {
        "command": args.command,
        "config_echo": {k: _jsonable(v) for k, v in cfg.items()},
        "rows": rows,
    }
    if checks is not None:
        payload["checks"] = checks
    payload["timing_ms"] = (time.perf_counter() - t0) * 1e3
    text = render(payload, cfg["format"], COLUMNS[args.command])
    if cfg["out"]:
        with open(cfg["out"], "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if checks is not None and not all(c["passed"] for c in checks):
        failed = [c["check"] for c in checks if not c["passed"]]
        sys.stderr.write("failed checks: " + ", ".join(failed) + "\n")
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
