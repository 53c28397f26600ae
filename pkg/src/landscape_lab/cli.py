"""Command-line entry point: run/compare/describe an experiment config.

Exit codes: 0 on success, 1 on config validation errors, 2 when at least
one run failed at runtime (partial results are kept on disk).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .experiment import ConfigError, compare_baseline, describe, parse_config, run_experiment


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="landscape-lab",
        description="Loss-landscape experiments for special-neuron augmented classifiers.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, help_text in (
        ("run", "execute the configured sweep and write report files"),
        ("compare", "run baseline and augmented arms from shared initializations"),
        ("describe", "print the sweep plan without executing anything"),
    ):
        p = sub.add_parser(verb, help=help_text)
        p.add_argument("config", help="experiment config file (key = value INI sections)")
        p.add_argument("--out", help="override the output directory")
        p.add_argument("--threads", type=int, help="override the worker count")
        p.add_argument("--seed-offset", type=int, help="override the first seed")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = parse_config(args.config)
        if args.out is not None:
            config = replace(config, out_dir=Path(args.out))
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError("output.threads: must be >= 1")
            config = replace(config, threads=args.threads)
        if args.seed_offset is not None:
            config = replace(config, seed_offset=args.seed_offset)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if args.verb == "describe":
        print(describe(config), end="")
        return 0

    runner = run_experiment if args.verb == "run" else compare_baseline
    try:
        rows, failure = runner(config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"{len(rows)} runs completed; reports in {config.out_dir}")
    if failure is not None:
        print(f"error: at least one run failed: {failure}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
