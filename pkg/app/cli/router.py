"""
CLI Router
Argument parsing and subcommand dispatch. Logs go to stderr; results go to
files under the run directory, and ``validate`` prints its diagnostics as JSON.
"""

import argparse
import json
import sys
from typing import List, Optional

from loguru import logger

from app.exceptions import EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION
from .commands import (
    cmd_classify,
    cmd_connectivity,
    cmd_preprocess,
    cmd_report,
    cmd_synth,
    cmd_validate,
    load_run_config,
)

SUBCOMMANDS = {
    "synth": "write a synthetic pre/post cohort with ground truth",
    "preprocess": "band-pass, notch, re-reference and baseline-correct recordings",
    "connectivity": "compute MSC / WC / PDC matrices per recording",
    "classify": "run the metric x selector x model crossing and write the report",
    "validate": "check the configuration and estimate the work",
    "report": "re-render table.md and hyperparameters.md from report.json",
}


def _add_global_flags(parser: argparse.ArgumentParser, default) -> None:
    parser.add_argument("--config", default=default, help="run configuration JSON")
    parser.add_argument("--seed", type=int, default=default, help="run seed (overrides the config)")
    parser.add_argument("--out", default=default, help="output directory (overrides the config)")
    parser.add_argument("--jobs", type=int, default=default, help="worker processes (overrides the config)")


def build_parser() -> argparse.ArgumentParser:
    """Global flags are accepted before or after the subcommand."""
    parser = argparse.ArgumentParser(
        prog="connectivity-pipeline",
        description="EEG functional connectivity classification pipeline",
    )
    _add_global_flags(parser, None)
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, help_text in SUBCOMMANDS.items():
        _add_global_flags(subparsers.add_parser(name, help=help_text), argparse.SUPPRESS)
    return parser


def dispatch(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand and return its exit code."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_VALIDATION
    config = load_run_config(args.config, args.seed, args.out, args.jobs)
    logger.info(f"Run {config.run_id}: {args.command}")

    if args.command == "synth":
        cmd_synth(config)
        return EXIT_OK
    if args.command == "preprocess":
        failures = cmd_preprocess(config)
    elif args.command == "connectivity":
        failures = cmd_connectivity(config)
    elif args.command == "classify":
        report = cmd_classify(config)
        failures = report.subject_failures + [
            f"{c.cell.metric}/{c.cell.selector}/{c.cell.family.value}" for c in report.cells
            if c.status == "failed"
        ]
    elif args.command == "validate":
        print(json.dumps(cmd_validate(config), sort_keys=True, indent=2), file=sys.stdout)
        return EXIT_OK
    else:
        cmd_report(config)
        return EXIT_OK

    for failure in failures:
        logger.error(failure)
    return EXIT_RUNTIME if failures else EXIT_OK
