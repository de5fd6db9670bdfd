"""Command-line interface.

Subcommands: augment, measure, analyze, bootstrap, report. A JSON config
file provides the run definition; flags override it. Exit codes: 0
success, 1 configuration error, 2 data error, 3 analysis error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ._version import __version__
from .config import load_config
from .errors import AnalysisError, ConfigError, DataError
from .pipeline import (
    augment_file,
    run_analysis,
    run_bootstrap,
    run_measures,
    run_report,
)
from .serialize import measure_matrix_from_csv

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    # Usage problems are configuration errors (exit 1), not argparse's 2.
    def error(self, message: str):
        raise ConfigError(message)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON configuration file")
    sub.add_argument("--real", help="real sessions JSON path")
    sub.add_argument("--simulated", help="simulated sessions JSON path")
    sub.add_argument("--qrels", help="TREC qrels path")
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--seed", type=int, help="random seed")
    sub.add_argument(
        "--pairing", choices=["one-to-one", "one-to-many"], help="pairing mode"
    )
    sub.add_argument("--heatmap", action="store_true", default=None,
                     help="emit heatmap.svg")
    sub.add_argument("--k", type=int, help="metric cutoff")
    sub.add_argument("--rbo-p", type=float, dest="rbo_p", help="RBO persistence")
    sub.add_argument(
        "--iterations", type=int, dest="bootstrap_iterations",
        help="bootstrap iteration count",
    )


def _build_parser() -> _Parser:
    parser = _Parser(prog="qsimval", description=__doc__)
    parser.add_argument("--version", action="version", version=f"qsimval {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    augment = commands.add_parser("augment", help="fill empty SERPs via a search API")
    augment.add_argument("--sessions", required=True, help="sessions JSON to augment")
    augment.add_argument(
        "--kind", required=True, choices=["real", "simulated"],
        help="which session schema the file follows",
    )
    augment.add_argument("--endpoint", required=True, help="search API URL")
    augment.add_argument("--k", type=int, default=10, help="SERP length to request")
    augment.add_argument("--out-file", required=True, help="augmented output path")
    augment.add_argument("--timeout", type=float, default=30.0)
    augment.add_argument("--max-in-flight", type=int, default=4)

    for name, help_text in (
        ("measure", "compute the measure matrix and JSONL report"),
        ("bootstrap", "bootstrap the correlation matrices over query selection"),
        ("report", "measure + analyze + bootstrap"),
    ):
        sub = commands.add_parser(name, help=help_text)
        _add_common(sub)

    analyze = commands.add_parser("analyze", help="run statistics over a measure matrix")
    analyze.add_argument("--matrix", required=True, help="measure_matrix.csv to analyze")
    _add_common(analyze)

    return parser


def _overrides(args: argparse.Namespace) -> dict:
    keys = (
        "real",
        "simulated",
        "qrels",
        "out",
        "seed",
        "pairing",
        "heatmap",
        "k",
        "rbo_p",
        "bootstrap_iterations",
    )
    return {key: getattr(args, key, None) for key in keys}


def _run(argv: list[str]) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "augment":
        filled = augment_file(
            args.sessions,
            args.kind,
            args.endpoint,
            args.k,
            args.out_file,
            timeout=args.timeout,
            max_in_flight=args.max_in_flight,
        )
        print(f"augmented {filled} SERP(s) -> {args.out_file}")
        return 0

    config = load_config(args.config, _overrides(args))

    if args.command == "measure":
        matrix = run_measures(config)
        print(
            f"wrote measures.jsonl and measure_matrix.csv to {config.out} "
            f"({matrix.n_rows} pairs x {matrix.n_columns} measures)"
        )
        return 0

    if args.command == "analyze":
        text = Path(args.matrix).read_text("utf-8") if Path(args.matrix).is_file() else None
        if text is None:
            raise DataError(f"matrix file not found: {args.matrix}")
        matrix = measure_matrix_from_csv(text)
        bundle = run_analysis(matrix, config)
        for name in sorted(bundle.written):
            print(f"wrote {bundle.written[name]}")
        if not bundle.ok():
            for name, reason in sorted(bundle.errors.items()):
                print(f"error: {name}: {reason}", file=sys.stderr)
            return 3
        return 0

    if args.command == "bootstrap":
        payload = run_bootstrap(config)
        modes = ", ".join(sorted(payload["modes"]))
        print(f"wrote bootstrap.json to {config.out} (modes: {modes})")
        return 0

    if args.command == "report":
        bundle = run_report(config)
        for name in sorted(bundle.written):
            print(f"wrote {bundle.written[name]}")
        print(f"wrote {Path(config.out) / 'measures.jsonl'}")
        print(f"wrote {Path(config.out) / 'measure_matrix.csv'}")
        if not bundle.ok():
            for name, reason in sorted(bundle.errors.items()):
                print(f"error: {name}: {reason}", file=sys.stderr)
            return 3
        return 0

    raise ConfigError(f"unknown command '{args.command}'")


def main(argv: list[str] | None = None) -> int:
    try:
        return _run(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except AnalysisError as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
