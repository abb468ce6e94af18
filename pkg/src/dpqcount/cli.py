"""Command-line front end.

Exit codes: 0 on success, 1 when a run finished but a verification flag
failed, 2 on usage errors.  All machine output is timestamp-free so that
identical configurations produce byte-identical reports.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import exact_analysis, harness, sort_core
from .harness import ExperimentConfig, UsageError


def _default_seed() -> int:
    env = os.environ.get("DPQS_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise UsageError(f"DPQS_SEED must be an integer, got {env!r}") from exc


def _flatten(prefix: str, value, rows: list) -> None:
    if isinstance(value, dict):
        for key in sorted(value):
            _flatten(f"{prefix}.{key}" if prefix else str(key), value[key], rows)
    elif isinstance(value, (list, tuple)):
        rows.append((prefix, ";".join(str(v) for v in value)))
    else:
        rows.append((prefix, value))


def _emit(report: dict, fmt: str, output_path) -> None:
    if fmt == "json":
        text = json.dumps(report, indent=2, sort_keys=True, default=str) + "\n"
    else:
        rows: list = []
        _flatten("", report, rows)
        text = "key,value\n" + "\n".join(f"{k},{v}" for k, v in rows) + "\n"
    if output_path:
        with open(output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _read_keys(path: str) -> list:
    if path == "-":
        text = sys.stdin.read()
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    tokens = text.split()
    if not tokens:
        raise UsageError("no input values to sort")
    try:
        return [int(tok) for tok in tokens]
    except ValueError:
        pass
    try:
        return [float(tok) for tok in tokens]
    except ValueError as exc:
        raise UsageError(f"input is not numeric: {exc}") from exc


def _cmd_sort(args) -> int:
    values = _read_keys(args.path)
    arr = sort_core.as_keys(values)
    duplicates = len(np.unique(arr)) != len(arr)
    if args.variant == "classic":
        profile = sort_core.sort_classic(arr)
    else:
        profile = sort_core.sort_count(arr)
    report = {
        "variant": args.variant,
        "n": int(arr.size),
        "sorted": [v.item() for v in arr],
        "profile": {
            "comparisons": profile.comparisons,
            "plain_swaps": profile.plain_swaps,
            "rotate3_ops": profile.rotate3_ops,
            "half_swaps": profile.half_swaps,
        },
        "duplicate_keys": bool(duplicates),
    }
    if duplicates:
        report["note"] = "duplicate keys present; cost figures fall outside the distinct-key cost model"
    if args.format == "json":
        _emit(report, "json", args.output)
    else:
        sys.stdout.write(" ".join(str(v) for v in report["sorted"]) + "\n")
        sys.stdout.write(
            f"comparisons={profile.comparisons} plain_swaps={profile.plain_swaps} "
            f"rotate3_ops={profile.rotate3_ops} half_swaps={profile.half_swaps}\n")
        if duplicates:
            sys.stdout.write("note: duplicate keys; cost model assumes distinct keys\n")
    return 0


def _cmd_exact(args) -> int:
    n = args.n
    if n < 0:
        raise UsageError("n must be non-negative")
    mean_c = exact_analysis.mean_comparisons(n)
    mean_s = exact_analysis.mean_swaps(n)

    def render(q: Fraction) -> dict:
        return {"rational": f"{q.numerator}/{q.denominator}", "decimal": float(q)}

    report = {
        "n": n,
        "mean_comparisons": render(mean_c),
        "mean_swaps": render(mean_s),
    }
    if n >= 2:
        report["mean_partition_swaps"] = render(exact_analysis.mean_partition_swaps(n))
        report["mean_splus"] = render(exact_analysis.mean_splus(n))
    if n >= 4:
        report["mean_comparisons_asymptotic"] = exact_analysis.mean_comparisons_asymptotic(n)
        report["mean_swaps_asymptotic"] = exact_analysis.mean_swaps_asymptotic(n)
    constants = exact_analysis.analysis_constants()
    report["constants"] = {
        "a_c": float(constants.a_c),
        "a_s": float(constants.a_s),
        "sigma2_c": float(constants.sigma2_c),
        "sigma2_s": float(constants.sigma2_s),
        "sigma2_cs": float(constants.sigma2_cs),
        "corr_limit": float(constants.corr_limit),
    }
    _emit(report, args.format, args.output)
    return 0


def _config_from(args, subcommand: str) -> ExperimentConfig:
    return ExperimentConfig(
        subcommand=subcommand,
        n=getattr(args, "n", 10_000),
        samples=getattr(args, "samples", 1000),
        seed=args.seed,
        depth=getattr(args, "depth", 25),
        prune_eps=getattr(args, "prune_eps", 1e-4),
        output_path=args.output,
        output_format=args.format,
        workers=getattr(args, "workers", 1),
        variant=getattr(args, "variant", "both"),
    )


def _cmd_exhaustive(args) -> int:
    config = _config_from(args, "exhaustive")
    config.validate()
    report = harness.run_exhaustive(config.n)
    _emit(report, args.format, args.output)
    return 0 if report["passed"] else 1


def _cmd_partition(args) -> int:
    config = _config_from(args, "partition")
    config.validate()
    report = harness.run_exhaustive_partition(config.n)
    _emit(report, args.format, args.output)
    return 0 if report["passed"] else 1


def _cmd_mc(args) -> int:
    config = _config_from(args, "mc")
    report = harness.run_montecarlo(config)
    _emit(report, args.format, args.output)
    return 0 if report["passed"] else 1


def _cmd_scatter(args) -> int:
    config = _config_from(args, "scatter")
    if config.output_path is None:
        raise UsageError("scatter requires --output for the CSV file")
    report = harness.emit_scatter(config)
    sys.stdout.write(json.dumps(report, indent=2, sort_keys=True, default=str) + "\n")
    return 0 if report["passed"] else 1


def _cmd_urn(args) -> int:
    report = harness.urn_report(max_step=args.max_step, max_n=args.max_n)
    _emit(report, args.format, args.output)
    return 0 if report["passed"] else 1


def _cmd_rde(args) -> int:
    config = _config_from(args, "rde")
    report = harness.rde_report(config)
    _emit(report, args.format, args.output)
    return 0 if report["passed"] else 1


def _cmd_tollmoments(args) -> int:
    if args.resolution < 1000:
        raise UsageError("resolution must be at least 1000")
    report = harness.tollmoments_report(args.resolution)
    _emit(report, args.format, args.output)
    return 0 if report["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dpqcount",
        description="Instrumented dual-pivot quicksort: exact analysis, urn checks, "
                    "Monte Carlo and limit-law sampling.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, n_default=None, samples_default=None):
        p.add_argument("--seed", type=int, default=None,
                       help="run seed (default: DPQS_SEED or 0)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--output", default=None, help="write the report to this path")
        if n_default is not None:
            p.add_argument("--n", type=int, default=n_default)
        if samples_default is not None:
            p.add_argument("--samples", type=int, default=samples_default)

    p = sub.add_parser("sort", help="sort numbers from a file or stdin")
    p.add_argument("path", nargs="?", default="-",
                   help="whitespace-separated numbers; '-' reads stdin")
    p.add_argument("--variant", choices=("count", "classic"), default="count")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--output", default=None, help="write the report to this path")
    p.add_argument("--seed", type=int, default=None, help=argparse.SUPPRESS)
    p.set_defaults(func=_cmd_sort)

    p = sub.add_parser("exact", help="exact mean formulas for a given n")
    common(p, n_default=10)
    p.set_defaults(func=_cmd_exact)

    p = sub.add_parser("exhaustive", help="exact full-sort averages over all permutations")
    common(p, n_default=8)
    p.set_defaults(func=_cmd_exhaustive)

    p = sub.add_parser("partition", help="exact first-partition averages over all permutations")
    common(p, n_default=8)
    p.set_defaults(func=_cmd_partition)

    p = sub.add_parser("mc", help="Monte Carlo cost moments at scale")
    common(p, n_default=10_000, samples_default=1000)
    p.add_argument("--variant", choices=("count", "classic", "both"), default="both")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_mc)

    p = sub.add_parser("scatter", help="emit normalized per-sample costs as CSV")
    common(p, n_default=10_000, samples_default=1000)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_scatter)

    p = sub.add_parser("urn", help="exact urn identity report")
    common(p)
    p.add_argument("--max-step", type=int, default=60)
    p.add_argument("--max-n", type=int, default=200)
    p.set_defaults(func=_cmd_urn)

    p = sub.add_parser("rde", help="sample the bivariate cost limit law")
    common(p, samples_default=100_000)
    p.add_argument("--depth", type=int, default=25)
    p.add_argument("--prune-eps", dest="prune_eps", type=float, default=1e-4)
    p.set_defaults(func=_cmd_rde)

    p = sub.add_parser("tollmoments", help="deterministic toll-moment quadrature")
    common(p)
    p.add_argument("--resolution", type=int, default=2000)
    p.set_defaults(func=_cmd_tollmoments)

    return parser


def cli_dispatch(argv=None) -> int:
    """Parse argv and run the selected subcommand; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "seed", None) is None:
            args.seed = _default_seed()
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return 1


def main(argv=None) -> int:
    return cli_dispatch(argv)


if __name__ == "__main__":
    sys.exit(main())
