"""Command-line interface: pricing, distribution queries, measure changes, fitting, simulation.

Every command reads a JSON config with ``model``, ``contract`` and ``numerics``
sections (``contract`` and ``numerics`` optional where unused).  A JSON report
written with ``--out`` embeds the resolved config under ``"config"`` and can be
passed back as ``--config`` to repeat the run exactly.  Flags override file
values, which override defaults.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 infeasible input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from itertools import combinations

import numpy as np

from .cliquet import (
    CliquetContract,
    expected_z1_dampened_fourier,
    price_distribution_method,
    price_fourier_method,
)
from .errors import (
    DivergenceDetected,
    DomainError,
    InfeasibleMoments,
    MomentExplosion,
    NumericalError,
    SingularCombination,
)
from .market import GeometricMeixnerModel, period_law
from .measure_change import (
    GeneralChangeSpec,
    SimpleChangeSpec,
    apply_simple_change,
    general_change_report,
    novikov_check,
    radon_nikodym_h_general,
    radon_nikodym_h_simple,
    theta_shift,
)
from .meixner import cdf, char_function, cumulants, fit_by_moments, pdf
from .montecarlo import _table, mc_price, sample_y
from .quadrature import PRICING_CONFIG, QuadConfig

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_INFEASIBLE = 0, 2, 3, 4

METHODS = ("distribution", "fourier", "mc")

NUMERIC_DEFAULTS = {
    "abs_tol": PRICING_CONFIG.abs_tol,
    "rel_tol": PRICING_CONFIG.rel_tol,
    "damp": 0.5,
    "paths": 100_000,
    "seed": 0,
    "method": "distribution",
    "workers": 1,
}

MIN_FIT_ROWS = 30


class ConfigError(DomainError):
    """Malformed or incomplete configuration."""


def _fmt(x) -> str:
    return "%.17g" % x


# --------------------------------------------------------------------- config


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    # a report carries its resolved config
    if "config" in doc and isinstance(doc["config"], dict):
        doc = doc["config"]
    return doc


def _section(doc: dict, name: str, required: bool) -> dict | None:
    sec = doc.get(name)
    if sec is None:
        if required:
            raise ConfigError(f"config is missing the {name!r} section")
        return None
    if not isinstance(sec, dict):
        raise ConfigError(f"config section {name!r} must be an object")
    return sec


def _numerics(doc: dict, args) -> dict:
    given = _section(doc, "numerics", False) or {}
    unknown = set(given) - set(NUMERIC_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown numerics keys: {sorted(unknown)}")
    out = {**NUMERIC_DEFAULTS, **given}
    if getattr(args, "tol", None) is not None:
        out["abs_tol"], out["rel_tol"] = args.tol, 10.0 * args.tol
    for key in ("damp", "paths", "seed", "method", "workers"):
        val = getattr(args, key, None)
        if val is not None:
            out[key] = val
    for key in ("abs_tol", "rel_tol", "damp"):
        v = out[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not (math.isfinite(v) and v > 0):
            raise ConfigError(f"numerics.{key} must be a positive number, got {v!r}")
        out[key] = float(v)
    for key, low in (("paths", 1), ("seed", 0), ("workers", 1)):
        v = out[key]
        if isinstance(v, bool) or not isinstance(v, int) or v < low:
            raise ConfigError(f"numerics.{key} must be an integer >= {low}, got {v!r}")
    if out["method"] not in METHODS + ("all",):
        raise ConfigError(f"numerics.method must be one of {METHODS + ('all',)}, got {out['method']!r}")
    return out


def resolve_config(args, need_contract: bool) -> dict:
    """Model, contract and numerics after validation and flag overrides."""
    if args.config is None:
        raise ConfigError("--config is required for this command")
    doc = _load_json(args.config)
    unknown = set(doc) - {"model", "contract", "numerics"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    model = GeometricMeixnerModel.from_dict(_section(doc, "model", True))
    sec = _section(doc, "contract", need_contract)
    contract = CliquetContract.from_dict(sec) if sec is not None else None
    return {"model": model, "contract": contract, "numerics": _numerics(doc, args)}


def config_record(cfg: dict) -> dict:
    out = {"model": cfg["model"].to_dict()}
    if cfg["contract"] is not None:
        out["contract"] = cfg["contract"].to_dict()
    out["numerics"] = dict(cfg["numerics"])
    return out


def _derived(cfg: dict) -> dict:
    out = {"b": cfg["model"].b}
    if cfg["contract"] is not None:
        out["tau"] = cfg["contract"].tau
    return out


def _write_report(path: str | None, report: dict) -> None:
    if path is None:
        return
    # json writes floats with repr, the shortest string that round-trips exactly
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, allow_nan=False)
        fh.write("\n")


def _emit_rows(path: str | None, header, rows, out) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
    text = buf.getvalue()
    if path is None:
        out.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ------------------------------------------------------------------- commands


def cmd_price(args, out) -> dict:
    cfg = resolve_config(args, need_contract=True)
    model, contract, num = cfg["model"], cfg["contract"], cfg["numerics"]
    qcfg = QuadConfig(abs_tol=num["abs_tol"], rel_tol=num["rel_tol"])
    methods = METHODS if num["method"] == "all" else (num["method"],)
    results = {}
    for method in methods:
        if method == "distribution":
            results[method] = price_distribution_method(model, contract, qcfg).to_dict()
        elif method == "fourier":
            rep = price_fourier_method(model, contract, qcfg).to_dict()
            rep["details"]["e_z1_dampened"] = expected_z1_dampened_fourier(model, contract, num["damp"])
            results[method] = rep
        else:
            est = mc_price(model, contract, num["paths"], num["seed"], workers=num["workers"])
            results[method] = {"price": est.value, "method": "mc", **est.to_dict()}
    deltas = {
        f"{a}-{b}": results[a]["price"] - results[b]["price"] for a, b in combinations(results, 2)
    }
    report = {
        "command": "price",
        "config": config_record(cfg),
        "derived": _derived(cfg),
        "results": results,
    }
    if deltas:
        report["deltas"] = deltas
    for name, res in results.items():
        spread = res.get("std_error", res.get("error_estimate"))
        label = "std error" if "std_error" in res else "error estimate"
        out.write(f"{name:<13} price = {_fmt(res['price'])}   ({label} {spread:.3g})\n")
    for key, d in deltas.items():
        out.write(f"{key:<26} {d:+.3e}\n")
    return report


def _parse_grid(spec: str):
    parts = spec.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must look like 'start:stop:count', got {spec!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"grid must look like 'start:stop:count', got {spec!r}") from None
    if not (math.isfinite(a) and math.isfinite(b) and a < b and n >= 2):
        raise ConfigError(f"grid needs finite start < stop and count >= 2, got {spec!r}")
    return np.linspace(a, b, n)


def cmd_dist(args, out) -> dict:
    cfg = resolve_config(args, need_contract=False)
    p = cfg["model"].q_params
    t = args.t
    if not (math.isfinite(t) and t > 0):
        raise ConfigError(f"--t must be positive, got {t}")
    report = {"command": "dist", "config": config_record(cfg), "derived": _derived(cfg), "query": args.query, "t": t}
    if args.query == "cumulants":
        c = cumulants(p, t)._asdict()
        report["cumulants"] = c
        for k, v in c.items():
            out.write(f"{k:<9} {_fmt(v)}\n")
        return report
    if args.grid is None:
        raise ConfigError(f"--grid is required for the {args.query} query")
    xs = _parse_grid(args.grid)
    if args.query == "pdf":
        vals = pdf(p, t, xs)
        header, rows = ["x", "pdf"], zip(xs.tolist(), np.asarray(vals).tolist())
    elif args.query == "cdf":
        vals = cdf(p, t, xs)
        header, rows = ["x", "cdf"], zip(xs.tolist(), np.asarray(vals).tolist())
    else:
        vals = np.asarray(char_function(p, xs, t))
        header, rows = ["u", "re", "im"], zip(xs.tolist(), vals.real.tolist(), vals.imag.tolist())
    _emit_rows(args.csv, header, rows, out)
    report["rows"] = len(xs)
    return report


def cmd_measure_change(args, out) -> dict:
    cfg = resolve_config(args, need_contract=False)
    model = cfg["model"]
    q = model.q_params
    general = args.alpha_star is not None or args.delta_star is not None
    diag: dict = {}
    if general:
        spec = GeneralChangeSpec(
            q.alpha if args.alpha_star is None else args.alpha_star,
            args.beta_star,
            q.delta if args.delta_star is None else args.delta_star,
        )
        res = general_change_report(q, spec, strict=not args.principal_value)
        phys = res.params
        diag["location_integral"] = float(res.location_integral.value)
        diag["pv_regularized"] = res.pv_regularized

        def h(z):
            return radon_nikodym_h_general(q, spec, z)

    else:
        spec = SimpleChangeSpec(args.beta_star)
        phys = apply_simple_change(q, spec)
        diag["theta_shift_quadrature"] = theta_shift(q, spec)
        diag["theta_shift_closed_form"] = q.delta * q.alpha * (
            math.tan(spec.beta_star / 2.0) - math.tan(q.beta / 2.0)
        )

        def h(z):
            return radon_nikodym_h_simple(q, spec, z)

    try:
        diag["novikov"] = novikov_check(q, h)
    except DivergenceDetected as exc:
        diag["novikov"] = None
        diag["novikov_divergence"] = str(exc)
    physical = {"s0": model.s0, "r": model.r, **phys.to_dict()}
    report = {
        "command": "measure-change",
        "config": config_record(cfg),
        "derived": _derived(cfg),
        "kind": "general" if general else "simple",
        "physical_model": physical,
        "diagnostics": diag,
    }
    for k in ("alpha", "beta", "delta", "mu"):
        out.write(f"{k:<6} {_fmt(physical[k])}\n")
    for k, v in diag.items():
        out.write(f"{k:<24} {v if not isinstance(v, float) else _fmt(v)}\n")
    return report


def read_returns(path: str) -> np.ndarray:
    """One decimal log-return per line; blank lines and ``#`` comments are skipped."""
    values = []
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read returns file {path!r}: {exc.strerror}") from None
    with fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                v = float(text)
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: not a number: {text!r}") from None
            if not math.isfinite(v):
                raise ConfigError(f"{path}:{lineno}: value is not finite: {text!r}")
            values.append(v)
    if len(values) < MIN_FIT_ROWS:
        raise ConfigError(f"need at least {MIN_FIT_ROWS} returns, got {len(values)}")
    return np.asarray(values)


def sample_moments(y: np.ndarray) -> dict:
    """Mean, variance, skewness and (non-excess) kurtosis from central sample moments."""
    m = float(np.mean(y))
    d = y - m
    m2 = float(np.mean(d**2))
    if m2 == 0.0:
        return {"mean": m, "variance": 0.0, "skewness": 0.0, "kurtosis": 0.0}
    return {
        "mean": m,
        "variance": float(np.sum(d**2) / (y.size - 1)),
        "skewness": float(np.mean(d**3)) / m2**1.5,
        "kurtosis": float(np.mean(d**4)) / m2**2,
    }


def cmd_fit(args, out) -> dict:
    if not (math.isfinite(args.period) and args.period > 0):
        raise ConfigError(f"--period must be positive, got {args.period}")
    y = read_returns(args.returns_file)
    mom = sample_moments(y)
    params = fit_by_moments(mom["mean"], mom["variance"], mom["skewness"], mom["kurtosis"], t=args.period)
    report = {
        "command": "fit",
        "input": {"file": args.returns_file, "rows": int(y.size), "period": args.period},
        "sample_moments": mom,
        "params": params.to_dict(),
    }
    for k, v in params.to_dict().items():
        out.write(f"{k:<6} {_fmt(v)}\n")
    return report


def cmd_simulate(args, out) -> dict:
    cfg = resolve_config(args, need_contract=True)
    model, contract, num = cfg["model"], cfg["contract"], cfg["numerics"]
    if args.count < 0:
        raise ConfigError(f"--count must be nonnegative, got {args.count}")
    n = contract.resets_n
    if args.kind == "draws":
        header = ["y"]
        size = args.count
    else:
        header = ["path"] + [f"r{k}" for k in range(1, n + 1)]
        size = args.count * n
    rows: list = []
    if size > 0:
        table = _table(period_law(model, contract.tau), 4096)
        y = sample_y(table, size, num["seed"], workers=num["workers"])
        if args.kind == "draws":
            rows = ([v] for v in y.tolist())
        else:
            r = np.expm1(y).reshape(args.count, n)
            rows = ([i] + r[i].tolist() for i in range(args.count))
    _emit_rows(args.csv, header, rows, out)
    return {
        "command": "simulate",
        "config": config_record(cfg),
        "derived": _derived(cfg),
        "kind": args.kind,
        "count": args.count,
    }


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="meixner-cliquet", description="Cliquet pricing under the geometric Meixner model."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", metavar="PATH", help="JSON config or a previous report")
        sp.add_argument("--out", metavar="PATH", help="write a JSON report")

    sp = sub.add_parser("price", help="price the cliquet")
    common(sp)
    sp.add_argument("--method", choices=METHODS + ("all",))
    sp.add_argument("--paths", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--workers", type=int)
    sp.add_argument("--damp", type=float, help="dampening for the Fourier E[Z1] cross-check")
    sp.add_argument("--tol", type=float, help="absolute tolerance; relative is ten times this")
    sp.set_defaults(func=cmd_price)

    sp = sub.add_parser("dist", help="query the Meixner law of the model")
    common(sp)
    sp.add_argument("--query", choices=("pdf", "cdf", "cf", "cumulants"), required=True)
    sp.add_argument("--grid", metavar="START:STOP:COUNT")
    sp.add_argument("--t", type=float, default=1.0, help="time horizon (default 1)")
    sp.add_argument("--csv", metavar="PATH", help="write rows here instead of standard output")
    sp.set_defaults(func=cmd_dist)

    sp = sub.add_parser("measure-change", help="physical law from a structure-preserving change")
    common(sp)
    sp.add_argument("--beta-star", type=float, required=True)
    sp.add_argument("--alpha-star", type=float)
    sp.add_argument("--delta-star", type=float)
    sp.add_argument(
        "--principal-value",
        action="store_true",
        help="accept a general change whose location integral exists only as a principal value",
    )
    sp.set_defaults(func=cmd_measure_change)

    sp = sub.add_parser("fit", help="fit a Meixner law to observed log-returns by moments")
    common(sp, config=False)
    sp.add_argument("returns_file")
    sp.add_argument("--period", type=float, default=1.0, help="length of one observation period")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("simulate", help="draw period log-returns or simple-return paths")
    common(sp)
    sp.add_argument("--count", type=int, required=True)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--workers", type=int)
    sp.add_argument("--kind", choices=("draws", "paths"), default="draws")
    sp.add_argument("--csv", metavar="PATH", help="write rows here instead of standard output")
    sp.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.func(args, out)
        _write_report(args.out, report)
    except (InfeasibleMoments, MomentExplosion, SingularCombination) as exc:
        err.write(f"infeasible: {exc}\n")
        return EXIT_INFEASIBLE
    except DomainError as exc:
        err.write(f"invalid input: {exc}\n")
        return EXIT_INVALID
    except NumericalError as exc:
        err.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
