"""Command-line front end for the density bound and empirical engines.

Exit codes are a stable contract: 0 success, 2 usage or config error,
3 internal consistency or validation failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .bounds import (
    DEFAULT_LAMBDA_CAP,
    BoundParams,
    BoundsReport,
    ConsistencyError,
    ProblemSpec,
    StabilityError,
    admissible,
    compute_bounds,
    decimal_str,
    ds_formula,
    ds_local,
    iter_candidate_pairs,
    lambda_table,
    lambda_upper,
)
from .empirical import (
    empirical_density,
    empirical_pair_density,
    progression_mean_hs,
    tie_count,
)
from .numth import smooth_numbers

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INCONSISTENT = 3

DEFAULTS = {
    "y": 17,
    "z": 1000,
    "smax": 6,
    "lambda_cap": DEFAULT_LAMBDA_CAP,
    "digits": 6,
    "workers": 1,
    "format": "text",
    "sample": 20,
}

# config-file keys that mirror flags, with their converters
_CONFIG_KEYS = {
    "k": int,
    "r1": int,
    "r2": int,
    "y": int,
    "z": int,
    "smax": int,
    "lambda_cap": int,
    "n": int,
    "sample": int,
    "digits": int,
    "workers": int,
    "format": str,
    "out": str,
}


@dataclass(frozen=True)
class RunConfig:
    """Validated invocation: what to run and how to report it."""

    subcommand: str
    spec: ProblemSpec | None
    params: BoundParams
    n: int
    fmt: str
    out: str | None
    workers: int
    digits: int
    verbose: bool


class UsageError(ValueError):
    """Invalid flag/config combination; maps to exit code 2."""


def read_config_file(path: str) -> dict:
    """Parse a KEY=VALUE config file (one pair per line, # comments)."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected KEY=VALUE, got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip().lower()
            if key not in _CONFIG_KEYS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = _CONFIG_KEYS[key](value.strip())
            except ValueError as exc:
                raise UsageError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def _setting(args: argparse.Namespace, config: dict, name: str, fallback=None):
    """Flag wins over config file wins over built-in default."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in config:
        return config[name]
    return DEFAULTS.get(name, fallback)


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _value(x: Fraction, digits: int, rounding: str) -> dict:
    """Machine rendering of an exact value plus a one-sided decimal."""
    return {"fraction": _frac_str(x), "decimal": decimal_str(x, digits, rounding)}


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _json_dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _build_spec(args: argparse.Namespace, config: dict) -> ProblemSpec:
    missing = [f for f in ("k", "r1", "r2") if _setting(args, config, f) is None]
    if missing:
        raise UsageError("missing required problem parameters: " + ", ".join(f"--{m}" for m in missing))
    try:
        return ProblemSpec(
            k=_setting(args, config, "k"),
            r1=_setting(args, config, "r1"),
            r2=_setting(args, config, "r2"),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _build_params(args: argparse.Namespace, config: dict) -> BoundParams:
    cap = _setting(args, config, "lambda_cap")
    if cap != DEFAULT_LAMBDA_CAP and not getattr(args, "allow_heuristic_cap", False):
        raise UsageError(
            f"--lambda-cap {cap} invalidates the certified tail constant; "
            "pass --allow-heuristic-cap to proceed with a heuristic bound"
        )
    try:
        return BoundParams(
            y=_setting(args, config, "y"),
            z=_setting(args, config, "z"),
            s_max=_setting(args, config, "smax"),
            lambda_cap=cap,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _build_run_config(args: argparse.Namespace, need_spec: bool = True) -> RunConfig:
    config = read_config_file(args.config) if getattr(args, "config", None) else {}
    spec = _build_spec(args, config) if need_spec else None
    params = _build_params(args, config)
    workers = _setting(args, config, "workers")
    if workers < 1:
        raise UsageError("--workers must be >= 1")
    digits = _setting(args, config, "digits")
    if digits < 1:
        raise UsageError("--digits must be >= 1")
    n = _setting(args, config, "n", fallback=0) or 0
    return RunConfig(
        subcommand=args.subcommand,
        spec=spec,
        params=params,
        n=n,
        fmt=_setting(args, config, "format"),
        out=_setting(args, config, "out"),
        workers=workers,
        digits=digits,
        verbose=getattr(args, "verbose", False),
    )


def _pair_rows(report: BoundsReport) -> list[dict]:
    rows = []
    for pb in report.pairs or ():
        rows.append(
            {
                "a": pb.a,
                "b": pb.b,
                "ds": _frac_str(pb.ds),
                "db_minus": _frac_str(pb.db_minus),
                "db_plus": _frac_str(pb.db_plus),
                "best_s_lower": pb.best_s_lower,
                "best_s_upper": pb.best_s_upper,
            }
        )
    return rows


def render_bounds_report(report: BoundsReport, cfg: RunConfig, include_pairs: bool) -> str:
    spec, params = report.spec, report.params
    if cfg.fmt == "json":
        doc = {
            "spec": {"k": spec.k, "r1": spec.r1, "r2": spec.r2},
            "params": {
                "y": params.y,
                "z": params.z,
                "s_max": params.s_max,
                "lambda_cap": params.lambda_cap,
            },
            "lower": _value(report.lower, cfg.digits, "floor"),
            "upper": _value(report.upper, cfg.digits, "ceil"),
            "coverage": _value(report.coverage, cfg.digits, "floor"),
            "tail": _value(report.tail, cfg.digits, "ceil"),
        }
        if include_pairs:
            doc["pairs"] = _pair_rows(report)
        doc["diagnostics"] = list(report.diagnostics)
        return _json_dumps(doc)
    if cfg.fmt == "csv":
        lines = ["a,b,ds,db_minus,db_plus,best_s_lower,best_s_upper"]
        for row in _pair_rows(report):
            sl = "" if row["best_s_lower"] is None else row["best_s_lower"]
            su = "" if row["best_s_upper"] is None else row["best_s_upper"]
            lines.append(
                f"{row['a']},{row['b']},{row['ds']},{row['db_minus']},"
                f"{row['db_plus']},{sl},{su}"
            )
        return "\n".join(lines) + "\n"
    lines = [
        f"comparison: sigma({spec.k}n+{spec.r1}) >= sigma({spec.k}n+{spec.r2})",
        f"params: y={params.y} z={params.z} s_max={params.s_max} lambda_cap={params.lambda_cap}",
        f"lower:    {decimal_str(report.lower, cfg.digits, 'floor')}",
        f"upper:    {decimal_str(report.upper, cfg.digits, 'ceil')}",
        f"coverage: {decimal_str(report.coverage, cfg.digits, 'floor')}",
        f"tail:     {decimal_str(report.tail, cfg.digits, 'ceil')}",
        f"pairs:    {report.pair_count}",
    ]
    for note in report.diagnostics:
        lines.append(f"note: {note}")
    return "\n".join(lines) + "\n"


def run_bounds(args: argparse.Namespace) -> int:
    cfg = _build_run_config(args)
    include_pairs = args.pairs or cfg.fmt == "csv"
    report = compute_bounds(cfg.spec, cfg.params, workers=cfg.workers, keep_pairs=include_pairs)
    _emit(render_bounds_report(report, cfg, include_pairs=args.pairs and cfg.fmt == "json"), cfg.out)
    return EXIT_OK


def run_empirical(args: argparse.Namespace) -> int:
    cfg = _build_run_config(args)
    if cfg.n < 1:
        raise UsageError("--N must be >= 1")
    est = empirical_density(cfg.spec, cfg.n, workers=cfg.workers)
    ties = tie_count(cfg.spec, cfg.n, workers=cfg.workers) if args.ties else None
    if cfg.fmt == "json":
        doc = {
            "spec": {"k": cfg.spec.k, "r1": cfg.spec.r1, "r2": cfg.spec.r2},
            "N": est.N,
            "count": est.count,
            "density": _value(est.density, cfg.digits, "nearest"),
        }
        if ties is not None:
            doc["ties"] = ties.count
        text = _json_dumps(doc)
    else:
        lines = [
            f"comparison: sigma({cfg.spec.k}n+{cfg.spec.r1}) >= sigma({cfg.spec.k}n+{cfg.spec.r2})",
            f"N:       {est.N}",
            f"count:   {est.count}",
            f"density: {decimal_str(est.density, cfg.digits)}",
        ]
        if ties is not None:
            lines.append(f"ties:    {ties.count}")
        text = "\n".join(lines) + "\n"
    _emit(text, cfg.out)
    return EXIT_OK


def run_lambda(args: argparse.Namespace) -> int:
    cfg = _build_run_config(args, need_spec=False)
    table = lambda_table(cfg.params)
    if cfg.fmt == "json":
        doc = {
            "params": {
                "y": cfg.params.y,
                "s_max": cfg.params.s_max,
                "lambda_cap": cfg.params.lambda_cap,
            },
            "entries": {
                str(s): _value(v, cfg.digits, "ceil") for s, v in sorted(table.entries.items())
            },
        }
        text = _json_dumps(doc)
    else:
        lines = [f"params: y={cfg.params.y} s_max={cfg.params.s_max} lambda_cap={cfg.params.lambda_cap}"]
        for s, v in sorted(table.entries.items()):
            lines.append(f"s={s}: {decimal_str(v, cfg.digits, 'ceil')}")
        text = "\n".join(lines) + "\n"
    _emit(text, cfg.out)
    return EXIT_OK


def run_smooth(args: argparse.Namespace) -> int:
    cfg = _build_run_config(args, need_spec=False)
    values = smooth_numbers(cfg.params.y, cfg.params.z)
    if cfg.fmt == "json":
        text = _json_dumps({"y": cfg.params.y, "z": cfg.params.z, "count": len(values), "values": values})
    else:
        text = "\n".join(str(v) for v in values) + "\n"
    _emit(text, cfg.out)
    return EXIT_OK


def run_validate(args: argparse.Namespace) -> int:
    """Cross-check the closed cell-density formula, the residue scan and
    brute-force counting against each other; exit 3 on any failure."""
    cfg = _build_run_config(args, need_spec=args.k is not None or not args.check_lambda)
    checks: list[dict] = []
    failures = 0

    def record(name: str, ok: bool, detail: str) -> None:
        nonlocal failures
        checks.append({"check": name, "ok": ok, "detail": detail})
        if not ok:
            failures += 1

    if cfg.spec is not None:
        pairs = [
            (a, b)
            for a, b in iter_candidate_pairs(cfg.params)
            if admissible(a, b, cfg.spec, cfg.params.y)
        ]
        mismatch = 0
        first = ""
        for a, b in pairs:
            injected = bool(args.inject_fault) and not mismatch and not first
            formula = ds_formula(a, b, cfg.spec, cfg.params)
            local = ds_local(a, b, cfg.spec, cfg.params)
            if injected:
                formula += Fraction(1, 10**9)
            if formula != local:
                mismatch += 1
                if not first:
                    first = f"first at (a={a}, b={b}): formula={formula} local={local}"
        record(
            "ds_formula vs ds_local",
            mismatch == 0,
            f"{len(pairs)} admissible pairs, {mismatch} mismatches"
            + (f"; {first}; resolved in favor of the local scan" if first else ""),
        )

        if cfg.n > 0:
            sample = pairs[: args.sample] if args.sample else pairs
            bad = 0
            detail = ""
            for a, b in sample:
                ds = ds_local(a, b, cfg.spec, cfg.params)
                est = empirical_pair_density(a, b, cfg.spec, cfg.params.y, cfg.n)
                # exact three-sigma binomial check: (emp - ds)^2 * N <= 9 ds (1 - ds)
                diff = est.density - ds
                ok = diff * diff * est.total <= 9 * ds * (1 - ds)
                if not ok:
                    bad += 1
                    if not detail:
                        detail = (
                            f"first at (a={a}, b={b}): predicted {decimal_str(ds)} "
                            f"observed {decimal_str(est.density)}"
                        )
            record(
                "cell density vs brute force",
                bad == 0,
                f"{len(sample)} cells at N={cfg.n}, {bad} outside three sigma"
                + (f"; {detail}" if detail else ""),
            )

    if args.check_lambda:
        n = cfg.n if cfg.n > 0 else 10**6
        lam = lambda_upper(1, BoundParams(y=2, z=1, s_max=1, lambda_cap=cfg.params.lambda_cap))
        mean = progression_mean_hs(1, 2, 1, n)
        # the bound certifies the limit mean; a finite prefix may straddle
        # it slightly, so compare two-sided at one percent
        ok = 100 * abs(lam - mean) <= lam
        record(
            "rough-part mean vs lambda bound",
            ok,
            f"mean h over odd values at N={n} is {decimal_str(mean, 9)}, "
            f"bound {decimal_str(lam, 9, 'ceil')}",
        )

    if cfg.fmt == "json":
        doc = {"checks": checks, "failures": failures}
        text = _json_dumps(doc)
    else:
        lines = []
        for c in checks:
            lines.append(f"[{'ok' if c['ok'] else 'FAIL'}] {c['check']}: {c['detail']}")
        lines.append(f"failures: {failures}")
        text = "\n".join(lines) + "\n"
    _emit(text, cfg.out)
    return EXIT_OK if failures == 0 else EXIT_INCONSISTENT


def _add_spec_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, help="progression modulus k")
    p.add_argument("--r1", type=int, help="residue of the left comparand")
    p.add_argument("--r2", type=int, help="residue of the right comparand")


def _add_param_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--y", type=int, help="smoothness bound (default 17)")
    p.add_argument("--z", type=int, help="cell budget: enumerate a*b <= z (default 1000)")
    p.add_argument("--smax", type=int, help="largest comparison exponent (default 6)")
    p.add_argument("--lambda-cap", type=int, dest="lambda_cap",
                   help="prime cap in the tail bound (default 65536)")
    p.add_argument("--allow-heuristic-cap", action="store_true",
                   help="accept a non-default --lambda-cap (tail constant becomes heuristic)")


def _add_output_flags(p: argparse.ArgumentParser, formats=("text", "json", "csv")) -> None:
    p.add_argument("--format", choices=formats, help="output format (default text)")
    p.add_argument("--out", help="write the report to this path instead of stdout")
    p.add_argument("--digits", type=int, help="decimal digits in rendered values (default 6)")
    p.add_argument("--config", help="KEY=VALUE file supplying defaults for any flag")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sigma-density",
        description="Certified bounds on the density of n with sigma(kn+r1) >= sigma(kn+r2).",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("bounds", help="compute certified lower/upper density bounds")
    _add_spec_flags(p)
    _add_param_flags(p)
    _add_output_flags(p)
    p.add_argument("--workers", type=int, help="parallel workers (default 1)")
    p.add_argument("--pairs", action="store_true", help="include the per-cell table in the report")
    p.set_defaults(func=run_bounds)

    p = sub.add_parser("empirical", help="brute-force density up to N")
    _add_spec_flags(p)
    p.add_argument("--N", type=int, dest="n", help="count n = 1..N")
    p.add_argument("--ties", action="store_true", help="also count exact ties")
    p.add_argument("--workers", type=int, help="parallel workers (default 1)")
    _add_output_flags(p, formats=("text", "json"))
    p.set_defaults(func=run_empirical, lambda_cap=None, y=None, z=None, smax=None,
                   allow_heuristic_cap=False)

    p = sub.add_parser("validate", help="cross-check formulas against oracles")
    _add_spec_flags(p)
    _add_param_flags(p)
    p.add_argument("--N", type=int, dest="n",
                   help="brute-force sample size for cell checks (0 disables)")
    p.add_argument("--sample", type=int, default=DEFAULTS["sample"],
                   help="number of leading cells to brute-force (default 20, 0 = all)")
    p.add_argument("--check-lambda", action="store_true",
                   help="compare the s=1 tail bound against a computed mean")
    p.add_argument("--inject-fault", action="store_true",
                   help="test mode: corrupt one comparison to exercise the failure path")
    _add_output_flags(p, formats=("text", "json"))
    p.set_defaults(func=run_validate)

    p = sub.add_parser("lambda", help="print the certified tail-factor table")
    _add_param_flags(p)
    _add_output_flags(p, formats=("text", "json"))
    p.set_defaults(func=run_lambda, z=1)

    p = sub.add_parser("smooth", help="list smooth numbers up to z")
    p.add_argument("--y", type=int, help="smoothness bound (default 17)")
    p.add_argument("--z", type=int, help="upper limit (default 1000)")
    _add_output_flags(p, formats=("text", "json"))
    p.set_defaults(func=run_smooth, smax=1, lambda_cap=None, allow_heuristic_cap=False)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConsistencyError, StabilityError) as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entry() -> None:
    """Console-script entry point."""
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
