"""Command-line entry point: ``enhancedpu run <config> [--seed N] [--out DIR] [--jobs N] [--quiet]``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from .errors import ConfigError
from .harness import ExperimentConfig, run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="enhancedpu", description="PU-learning experiment runner")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment grid from a YAML config")
    p_run.add_argument("config", help="path to the experiment config")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--out", default=None, help="output directory (default: config 'output')")
    p_run.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p_run.add_argument("--quiet", action="store_true", help="only report errors")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        cfg = ExperimentConfig.load(args.config)
    except (ConfigError, OSError) as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg = dataclasses.replace(
            cfg,
            seed=args.seed,
            split=dataclasses.replace(cfg.split, seed=args.seed),
            joint=dataclasses.replace(cfg.joint, seed=args.seed),
        )
    return run(cfg, out_dir=args.out, jobs=max(1, args.jobs))


if __name__ == "__main__":
    sys.exit(main())
