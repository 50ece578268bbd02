"""Command-line entry point.

Provides one command with three subcommands:
- scatter run: run scenario files through their pipelines
- scatter compare: diff the results of two run directories
- scatter validate: check scenario files without running them
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .config import load_config
from .errors import ScatterError
from .runner import EXIT_ERROR, EXIT_FAIL, EXIT_PASS, compare_runs, run_scenario


def _configure_logging(verbosity: int):
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = os.environ.get("SCATTER_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("SCATTER_THREADS", "1")))
    except ValueError:
        return 1


def _error(exc: ScatterError):
    print(f"Error: {exc.code}: {exc}", file=sys.stderr)


def _run(args) -> int:
    worst = EXIT_PASS
    for config_path in args.configs:
        outcome = run_scenario(config_path, out=args.out, threads=args.threads, seed=args.seed)
        if outcome.error is not None:
            _error(outcome.error)
        if outcome.directory is not None:
            print(f"{outcome.summary['status']}: {config_path} -> {outcome.directory}")
            for check, passed in outcome.summary.get("checks", {}).items():
                print(f"  {check}: {'PASS' if passed else 'FAIL'}")
        # error outranks failure
        if outcome.exit_code == EXIT_ERROR or worst == EXIT_ERROR:
            worst = EXIT_ERROR
        else:
            worst = max(worst, outcome.exit_code)
    return worst


def _compare(args) -> int:
    tolerances = {}
    for item in args.tol:
        key, _, value = item.partition("=")
        try:
            tolerances[key] = float(value)
        except ValueError:
            print(f"Error: invalid tolerance '{item}', expected key=value", file=sys.stderr)
            return EXIT_ERROR
    try:
        report = compare_runs(args.run_a, args.run_b, tolerances)
    except ScatterError as exc:
        _error(exc)
        return EXIT_ERROR
    except (OSError, json.JSONDecodeError) as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    if report.empty:
        print("No differences")
        return EXIT_PASS
    for entry in report.entries:
        print(f"{entry.key}: {entry.a} vs {entry.b} (relative {entry.relative:.3g})")
    return EXIT_FAIL


def _validate(args) -> int:
    status = EXIT_PASS
    for config_path in args.configs:
        try:
            config = load_config(config_path)
        except ScatterError as exc:
            _error(exc)
            status = EXIT_ERROR
            continue
        print(f"OK: {config_path} ({config.name}, pipeline {config.pipeline})")
        if args.show:
            print(json.dumps(config.resolved(), indent=2, sort_keys=True))
    return status


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scatter",
        description="Run scattering-theory experiments on manifolds with a growing end",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  scatter run scenarios/mourre-free.json
  scatter run --seed 7 --threads 4 --out runs scenarios/*.json
  scatter compare runs/free-mourre-A runs/free-mourre-B --tol alpha_hat=0.05
  scatter validate --show scenarios/cook-short.json
        """,
    )
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Log progress (-v info, -vv debug; default from SCATTER_LOG_LEVEL)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run scenario files")
    run.add_argument("configs", nargs="+", type=str, help="Scenario JSON files")
    run.add_argument("--out", type=str, default="runs", help="Output root (default: runs)")
    run.add_argument(
        "--threads",
        type=int,
        default=_default_threads(),
        help="Worker threads (default: SCATTER_THREADS or 1)",
    )
    run.add_argument("--seed", type=int, default=None, help="Override the scenario seed")
    run.set_defaults(func=_run)

    compare = sub.add_parser("compare", help="Diff two run directories")
    compare.add_argument("run_a", type=str, help="First run directory")
    compare.add_argument("run_b", type=str, help="Second run directory")
    compare.add_argument(
        "--tol",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Relative tolerance for a result key (repeatable)",
    )
    compare.set_defaults(func=_compare)

    validate = sub.add_parser("validate", help="Check scenario files")
    validate.add_argument("configs", nargs="+", type=str, help="Scenario JSON files")
    validate.add_argument("--show", action="store_true", help="Print the resolved configuration")
    validate.set_defaults(func=_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    """Entry point for the scatter command."""
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    for config_path in getattr(args, "configs", []):
        if not Path(config_path).is_file():
            print(f"Error: File not found: {config_path}", file=sys.stderr)
            return EXIT_ERROR
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
