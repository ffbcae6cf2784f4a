"""``lcdk``: command-line front end for checks, extremal searches and sweeps.

Exit codes: 0 all checks passed, 1 some check failed (a report is still
written), 2 bad input or usage.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .closed_forms import (
    TruncGeomParams, normalizing_constant, solve_p_for_mean, trunc_geom_mean, trunc_geom_tail,
)
from .config import DEFAULTS
from .localization import (
    InfeasibleError, LinearConstraint, brute_force_max, default_log_p_grid, maximize_convex, moment_functional,
    neg_entropy_functional, squared_mean_functional, table_functional, tail_functional,
    upper_tail_functional,
)
from .report import VerificationReport, _jsonable
from .sequences import (
    COUNTING, IntegerInterval, PreconditionError, convolve, is_log_affine, is_log_concave, is_unimodal,
    random_log_concave, reference_from_json, reference_to_json, sequence_from_json, sequence_to_json,
)
from .sweeps import SWEEPS, geom_grid

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# input helpers


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed JSON ({exc})") from None


def _load_sequence(path: str):
    try:
        return sequence_from_json(_load_json(path))
    except (ValueError, TypeError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def _load_reference(spec: str | None):
    if spec is None or spec == "counting":
        return COUNTING
    try:
        return reference_from_json(_load_json(spec))
    except (ValueError, KeyError, TypeError, AttributeError) as exc:
        raise UsageError(f"{spec}: bad reference ({exc})") from None


def _interval(text: str | None, default: IntegerInterval | None = None) -> IntegerInterval | None:
    if text is None:
        return default
    try:
        return IntegerInterval.parse(text)
    except ValueError:
        raise UsageError(f"bad interval {text!r}; expected M:N with M <= N") from None


def _number(text: str, backend: str):
    """Parse a CLI number; the rational backend keeps ``a/b`` and integers exact."""
    try:
        if backend == "rational":
            return Fraction(text)
        return float(Fraction(text)) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad number {text!r}") from None


def _functional(spec: str, window: IntegerInterval):
    name, _, arg = spec.partition(":")
    try:
        if name == "tail":
            return tail_functional(float(arg))
        if name == "upper-tail":
            return upper_tail_functional(float(arg))
        if name == "moment":
            return moment_functional(float(arg))
        if name == "neg-entropy":
            return neg_entropy_functional()
        if name == "squared-mean":
            return squared_mean_functional()
        if name == "table":
            vals = [float(Fraction(v)) for v in arg.split(",")]
            if len(vals) != len(window):
                raise UsageError("table functional must list one value per point of the interval")
            return table_functional(vals, window.lo)
    except ValueError:
        raise UsageError(f"bad functional {spec!r}") from None
    raise UsageError(f"unknown functional {spec!r}; use tail:t, upper-tail:t, moment:r, "
                     "neg-entropy, squared-mean or table:v0,v1,...")


def _constraint(spec: str, window: IntegerInterval) -> LinearConstraint:
    try:
        if spec.startswith("mean<="):
            return LinearConstraint.mean_at_most(float(Fraction(spec[6:])), window.lo, window.hi)
        if spec.startswith("const:"):
            return LinearConstraint.constant(float(Fraction(spec[6:])), window.lo, window.hi)
        if spec.startswith("table:"):
            return LinearConstraint(window, tuple(float(Fraction(v)) for v in spec[6:].split(",")))
        seq = _load_sequence(spec)
        return LinearConstraint(window, tuple(float(seq[n]) for n in window))
    except ValueError as exc:
        raise UsageError(f"bad constraint {spec!r}: {exc}") from None


# ---------------------------------------------------------------------------
# output


def _emit(payload: dict, args) -> None:
    payload = dict(payload)
    payload.setdefault("seed", args.seed)
    if not args.no_timestamp:
        payload["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    if args.format == "csv":
        text = payload.pop("_csv", None) or _flat_csv(payload)
    else:
        payload.pop("_csv", None)
        text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)


def _flat_csv(payload: dict) -> str:
    row = {k: json.dumps(_jsonable(v)) if isinstance(v, (dict, list)) else _jsonable(v)
           for k, v in payload.items()}
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=sorted(row))
    writer.writeheader()
    writer.writerow(row)
    return buf.getvalue()


def _emit_report(report: VerificationReport, args) -> int:
    payload = report.to_json()
    payload["tolerance"] = args.tolerance
    payload["_csv"] = report.to_csv() if args.format == "csv" else None
    _emit(payload, args)
    failed = (not report.ok) or report.worst_slack < -args.tolerance
    if report.name == "four-functions":
        # raw four-functions slack may be negative; only consistency counts
        failed = not report.ok
    return EXIT_FAIL if failed else EXIT_OK


# ---------------------------------------------------------------------------
# commands


def cmd_check(args) -> int:
    f = _load_sequence(args.file)
    gamma = _load_reference(args.reference)
    try:
        verdicts = {
            "log_concave": is_log_concave(f, gamma, args.tolerance_float),
            "log_affine": is_log_affine(f, gamma, args.tolerance_float),
            "unimodal": is_unimodal(f),
        }
    except PreconditionError as exc:
        raise UsageError(str(exc)) from None
    required = [r.replace("-", "_") for r in args.require.split(",")]
    unknown = [r for r in required if r not in verdicts]
    if unknown:
        raise UsageError(f"unknown predicate(s): {', '.join(unknown)}")
    ok = all(verdicts[r] for r in required)
    _emit({"command": "check", "file": args.file, "reference": reference_to_json(gamma),
           "required": required, "ok": ok, **verdicts}, args)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_extremize(args) -> int:
    window = _interval(args.interval)
    if window is None:
        raise UsageError("--interval is required")
    gamma = _load_reference(args.reference)
    phi = _functional(args.functional, window)
    h = _constraint(args.constraint, window)
    grid = None if args.grid is None else default_log_p_grid(args.grid)
    payload = {"command": "extremize", "interval": [window.lo, window.hi], "functional": args.functional,
               "constraint": args.constraint, "reference": reference_to_json(gamma)}
    try:
        res = maximize_convex(phi, h, window.lo, window.hi, gamma, grid)
    except InfeasibleError as exc:
        _emit({**payload, "ok": False, "error": str(exc)}, args)
        return EXIT_FAIL
    except PreconditionError as exc:
        raise UsageError(str(exc)) from None
    payload.update(res.to_json())
    payload["witness_log_affine"] = is_log_affine(res.witness(), gamma)
    ok = payload["witness_log_affine"]
    if args.oracle:
        oracle = brute_force_max(phi, h, window.lo, window.hi, gamma, args.oracle, args.seed)
        payload["oracle_samples"] = args.oracle
        payload["oracle_max"] = oracle
        payload["dominates_oracle"] = oracle <= res.best_value + 1e-9
        ok = ok and payload["dominates_oracle"]
    payload["ok"] = ok
    _emit(payload, args)
    return EXIT_OK if ok else EXIT_FAIL


def _verify_kwargs(args) -> dict:
    name = args.name
    iv = _interval(args.interval)
    kw: dict = {"seed": args.seed}
    deltas = tuple(args.delta) if args.delta else None
    if name == "four-functions":
        kw.update(deltas=deltas, **({"interval": iv} if iv else {}),
                  **({"trials": args.trials} if args.trials else {}))
    elif name == "convolution":
        kw.update(reference=_load_reference(args.reference),
                  **({"max_support": len(iv)} if iv else {}),
                  **({"trials": args.trials} if args.trials else {}))
    elif name == "prekopa-leindler":
        kw.update(**({"interval": iv} if iv else {}), **({"trials": args.trials} if args.trials else {}))
    elif name == "dilation":
        K = iv or IntegerInterval(0, 12)
        if args.exhaustive and len(K) > 20:
            raise UsageError("--exhaustive needs |K| <= 20")
        kw.update(K=K, deltas=deltas, subsets=None if args.exhaustive else (args.trials or 2000))
    elif name == "functional-dilation":
        kw.update(**({"interval": iv} if iv else {}), **({"trials": args.trials} if args.trials else {}))
    else:
        if args.geom_max_len is not None:
            kw["grid"] = geom_grid(max_len=args.geom_max_len)
        if args.trials:
            kw["random_count"] = args.trials
    return kw


def cmd_verify(args) -> int:
    kw = _verify_kwargs(args)
    try:
        report = SWEEPS[args.name](**kw)
    except PreconditionError as exc:
        raise UsageError(str(exc)) from None
    return _emit_report(report, args)


def cmd_convolve(args) -> int:
    f, g = _load_sequence(args.a), _load_sequence(args.b)
    gamma = _load_reference(args.reference)
    h = convolve(f, g)
    try:
        verdict = is_log_concave(h, gamma, args.tolerance_float)
    except PreconditionError as exc:
        raise UsageError(str(exc)) from None
    if args.output:
        Path(args.output).write_text(json.dumps(sequence_to_json(h), indent=2) + "\n")
    _emit({"command": "convolve", "convolution": sequence_to_json(h), "log_concave": verdict,
           "reference": reference_to_json(gamma), "ok": verdict}, args)
    return EXIT_OK if verdict else EXIT_FAIL


def cmd_geom(args) -> int:
    backend = args.backend or "rational"
    k, l = args.k, args.l
    if k > l:
        raise UsageError("need k <= l")
    payload = {"command": "geom", "quantity": args.quantity, "k": k, "l": l}
    try:
        if args.quantity == "solve-p":
            if args.c is None:
                raise UsageError("solve-p needs --c")
            value = solve_p_for_mean(k, l, float(_number(args.c, "float")))
            payload["c"] = args.c
        else:
            if args.p is None:
                raise UsageError(f"{args.quantity} needs --p")
            params = TruncGeomParams(_number(args.p, backend), k, l)
            payload["p"] = args.p
            if args.quantity == "constant":
                value = normalizing_constant(params)
            elif args.quantity == "mean":
                value = trunc_geom_mean(params)
            else:
                if args.t is None:
                    raise UsageError("tail needs --t")
                value = trunc_geom_tail(params, _number(args.t, backend))
                payload["t"] = args.t
    except (ValueError, PreconditionError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(str(exc)) from None
    payload["value"] = value
    payload["value_float"] = float(value)
    _emit(payload, args)
    return EXIT_OK


def cmd_sample(args) -> int:
    window = _interval(args.interval)
    if window is None:
        raise UsageError("--interval is required")
    gamma = _load_reference(args.reference)
    backend = args.backend or "float"
    rng = np.random.default_rng(args.seed)
    try:
        seqs = [sequence_to_json(random_log_concave(rng, window, gamma, backend)) for _ in range(args.count)]
    except PreconditionError as exc:
        raise UsageError(str(exc)) from None
    _emit({"command": "sample", "interval": [window.lo, window.hi], "backend": backend,
           "reference": reference_to_json(gamma), "sequences": seqs}, args)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_globals(p: argparse.ArgumentParser, top: bool) -> None:
    d = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
    p.add_argument("--backend", choices=("rational", "float"), default=d(None))
    p.add_argument("--seed", type=int, default=d(DEFAULTS.seed))
    p.add_argument("--tolerance", type=float, default=d(DEFAULTS.slack_tol),
                   help="slack below -tolerance counts as a failure")
    p.add_argument("--report", default=d(None), help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default=d("json"))
    p.add_argument("--no-timestamp", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lcdk", description="Discrete log-concavity toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_globals(parser, top=True)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        _add_globals(p, top=False)
        return p

    p = add("check", "test predicates on a sequence file")
    p.add_argument("file")
    p.add_argument("--reference", help="reference measure JSON file (default: counting)")
    p.add_argument("--require", default="log-concave",
                   help="comma-separated predicates that must hold: log-concave, log-affine, unimodal")
    p.set_defaults(func=cmd_check)

    p = add("extremize", "maximize a convex functional under one linear constraint")
    p.add_argument("--interval", required=True)
    p.add_argument("--reference")
    p.add_argument("--functional", required=True,
                   help="tail:t | upper-tail:t | moment:r | neg-entropy | squared-mean | table:v0,v1,...")
    p.add_argument("--constraint", required=True,
                   help="mean<=c | const:v | table:h0,h1,... | sequence JSON file (E[h] >= 0)")
    p.add_argument("--grid", type=int, help=f"log-ratio grid size (default {DEFAULTS.grid_points})")
    p.add_argument("--oracle", type=int, default=0, help="also run a brute-force search with N samples")
    p.set_defaults(func=cmd_extremize)

    p = add("verify", "run an inequality sweep")
    p.add_argument("name", choices=sorted(SWEEPS))
    p.add_argument("--exhaustive", action="store_true", help="all subsets (dilation)")
    p.add_argument("--trials", type=int)
    p.add_argument("--interval")
    p.add_argument("--delta", type=float, action="append", help="repeatable")
    p.add_argument("--reference")
    p.add_argument("--geom-max-len", type=int, help="largest l - k in the geometric grid")
    p.set_defaults(func=cmd_verify)

    p = add("convolve", "convolve two sequence files and test the result")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--reference")
    p.add_argument("--output", help="also write the convolution as a sequence file")
    p.set_defaults(func=cmd_convolve)

    p = add("geom", "truncated geometric closed forms")
    p.add_argument("quantity", choices=("constant", "mean", "tail", "solve-p"))
    p.add_argument("--p")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--t")
    p.add_argument("--c")
    p.set_defaults(func=cmd_geom)

    p = add("sample", "emit random log-concave sequences")
    p.add_argument("--interval", required=True)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--reference")
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    # predicates compare in the log domain, so they take the looser float tolerance
    args.tolerance_float = max(args.tolerance, DEFAULTS.float_tol)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"lcdk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
