"""Command-line driver.

Exit codes distinguish failure classes for scripted CI gates:
0 success, 1 usage/parse error, 2 data-integrity error, 3 degenerate statistics.
Set JUDGEKIT_LOG=DEBUG|INFO|WARNING for verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__, io
from .errors import (
    DataIntegrityError,
    InfeasibleConstructionError,
    InvalidScaleError,
    ParseError,
    StatisticError,
)
from .inference import sample_skewness
from .pipeline import (
    compare_systems,
    consolidate_runs,
    judge_report_from_matrix,
    prevalence_sweep,
)
from .ratings import OrdinalScale, validate_matrix
from .synthetic import generate_runs

logger = logging.getLogger("judgekit")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_DEGENERATE = 3

DEFAULT_SHARES = "0.55,0.65,0.75,0.85,0.95"


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors by default; our contract reserves 2 for data errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _shared_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scale", type=int, default=4, metavar="K", help="number of ordinal levels (default 4)")
    parser.add_argument("--weights", choices=["identity", "linear", "quadratic"], default="identity",
                        help="weighting for percent agreement / kappa columns (default identity)")
    parser.add_argument("--correction", choices=["bonferroni", "holm", "bh"], default="bh",
                        help="multiple-testing correction (default bh)")
    parser.add_argument("--alpha", type=float, default=0.05, help="significance level (default 0.05)")
    parser.add_argument("--zero-policy", choices=["drop", "pratt"], default="drop",
                        help="zero-difference handling in the signed-rank test (default drop)")
    parser.add_argument("--pooling", choices=["pooled", "per-direction"], default="pooled",
                        help="correction family: all metrics x directions pooled, or per direction")
    parser.add_argument("--tie-policy", choices=["lower"], default="lower",
                        help="majority-vote tie break (lower level wins; only supported policy)")
    parser.add_argument("--seed", type=int, default=0, help="seed for synthetic generation (default 0)")
    parser.add_argument("--format", choices=list(io.REPORT_STYLES), default="markdown",
                        help="report rendering (default markdown)")
    parser.add_argument("--output", default="-", metavar="PATH", help="output path, '-' for stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="judgekit", description="Judge reliability profiling and paired system comparison.")
    parser.add_argument("--version", action="version", version=f"judgekit {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = subparsers.add_parser("validate", help="parse a ratings file and report diagnostics")
    _shared_flags(p)
    p.add_argument("--ratings", required=True, help="ratings CSV path")
    p.add_argument("--ratings-format", choices=list(io.RATINGS_FORMATS), default="long-csv")

    p = subparsers.add_parser("judge-eval", help="judge-vs-gold agreement and ranking profile")
    _shared_flags(p)
    p.add_argument("--ratings", required=True, help="ratings CSV with judges and a gold column")
    p.add_argument("--ratings-format", choices=list(io.RATINGS_FORMATS), default="long-csv")
    p.add_argument("--gold", required=True, help="rater id holding the gold ratings")

    p = subparsers.add_parser("compare", help="two-directional paired comparison of two systems")
    _shared_flags(p)
    p.add_argument("--runs", required=True, help="run records path")
    p.add_argument("--runs-format", choices=list(io.RUNS_FORMATS), default="run-jsonl")
    p.add_argument("--system-a", default="A")
    p.add_argument("--system-b", default="B")
    p.add_argument("--metrics", default=None, help="comma-separated metric subset (default: all present)")

    p = subparsers.add_parser("describe", help="per-metric skewness and level distribution")
    _shared_flags(p)
    p.add_argument("--runs", required=True, help="run records path")
    p.add_argument("--runs-format", choices=list(io.RUNS_FORMATS), default="run-jsonl")

    p = subparsers.add_parser("sweep-prevalence", help="prevalence-paradox sweep demo")
    _shared_flags(p)
    p.add_argument("--shares", default=DEFAULT_SHARES, help=f"comma-separated shares (default {DEFAULT_SHARES})")
    p.add_argument("--observed-agreement", type=float, default=0.90)
    p.add_argument("--items", type=int, default=100)

    p = subparsers.add_parser("gen-synthetic", help="write a seeded synthetic run dataset (JSONL)")
    _shared_flags(p)
    p.add_argument("--queries", type=int, default=117)
    p.add_argument("--runs-per-query", type=int, default=10)

    return parser


def _emit(data: bytes, output: str) -> None:
    if output == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        Path(output).write_bytes(data)


def _cmd_validate(args) -> int:
    scale = OrdinalScale.from_k(args.scale)
    matrix = io.parse_ratings(args.ratings, args.ratings_format, scale)
    diag = validate_matrix(matrix)
    metadata = io.build_metadata(
        inputs={Path(args.ratings).name: io.canonical_digest(args.ratings)},
        decisions={"scale": args.scale, "ratings_format": args.ratings_format},
    )
    _emit(io.render_report(io.diagnostics_doc(diag, metadata), args.format), args.output)
    return EXIT_OK if diag.ok else EXIT_DATA


def _cmd_judge_eval(args) -> int:
    scale = OrdinalScale.from_k(args.scale)
    matrix = io.parse_ratings(args.ratings, args.ratings_format, scale)
    report = judge_report_from_matrix(matrix, args.gold, base_weights=args.weights)
    metadata = io.build_metadata(
        inputs={Path(args.ratings).name: io.canonical_digest(args.ratings)},
        decisions={
            "scale": args.scale,
            "weights": args.weights,
            "gold": args.gold,
            "alpha_difference": "ordinal",
        },
    )
    _emit(io.render_report(io.judge_report_doc(report, metadata), args.format), args.output)
    return EXIT_OK


def _cmd_compare(args) -> int:
    scale = OrdinalScale.from_k(args.scale)
    records = io.parse_runs(args.runs, args.runs_format, scale)
    consolidated = consolidate_runs(records)
    metrics = [m.strip() for m in args.metrics.split(",")] if args.metrics else None
    report = compare_systems(
        consolidated,
        args.system_a,
        args.system_b,
        metrics=metrics,
        alpha=args.alpha,
        correction=args.correction,
        pooling=args.pooling,
        zero_policy=args.zero_policy,
    )
    metadata = io.build_metadata(
        inputs={Path(args.runs).name: io.canonical_digest(args.runs)},
        decisions={
            "scale": args.scale,
            "alpha": args.alpha,
            "correction": args.correction,
            "pooling": args.pooling,
            "zero_policy": args.zero_policy,
            "tie_policy": args.tie_policy,
            "system_a": args.system_a,
            "system_b": args.system_b,
        },
    )
    _emit(io.render_report(io.comparison_report_doc(report, metadata), args.format), args.output)
    return EXIT_OK


def _cmd_describe(args) -> int:
    scale = OrdinalScale.from_k(args.scale)
    records = io.parse_runs(args.runs, args.runs_format, scale)
    consolidated = consolidate_runs(records)
    skewness = {}
    for metric in consolidated.metrics():
        levels = [vote.level for key, vote in sorted(consolidated.entries.items()) if key[2] == metric]
        try:
            skewness[metric] = sample_skewness(levels)
        except StatisticError as exc:
            skewness[metric] = io.Undefined(exc.tag)
    metadata = io.build_metadata(
        inputs={Path(args.runs).name: io.canonical_digest(args.runs)},
        decisions={"scale": args.scale, "tie_policy": args.tie_policy},
    )
    _emit(io.render_report(io.describe_doc(consolidated, scale, metadata, skewness), args.format), args.output)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    try:
        shares = [float(s) for s in args.shares.split(",") if s.strip()]
    except ValueError:
        raise ParseError(f"--shares must be comma-separated numbers, got {args.shares!r}") from None
    rows = prevalence_sweep(shares, args.observed_agreement, args.items)
    metadata = io.build_metadata(
        decisions={"observed_agreement": args.observed_agreement, "items": args.items},
    )
    _emit(io.render_report(io.sweep_doc(rows, metadata), args.format), args.output)
    return EXIT_OK


def _cmd_gen_synthetic(args) -> int:
    records = generate_runs(seed=args.seed, n_queries=args.queries, n_runs=args.runs_per_query, k=args.scale)
    _emit(io.runs_jsonl_bytes(records), args.output)
    logger.info("wrote %d synthetic run records (seed %d)", len(records), args.seed)
    return EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "judge-eval": _cmd_judge_eval,
    "compare": _cmd_compare,
    "describe": _cmd_describe,
    "sweep-prevalence": _cmd_sweep,
    "gen-synthetic": _cmd_gen_synthetic,
}


def main(argv=None) -> int:
    level = os.environ.get("JUDGEKIT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ParseError, InvalidScaleError, InfeasibleConstructionError) as exc:
        print(f"judgekit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataIntegrityError as exc:
        print(f"judgekit: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except StatisticError as exc:
        print(f"judgekit: degenerate statistics: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except FileNotFoundError as exc:
        print(f"judgekit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
