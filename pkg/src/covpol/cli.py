"""Command line entry point: ``covpol <experiment> [--config PATH] [overrides]``."""

from __future__ import annotations

import argparse
import logging
import sys

from pydantic import ValidationError

from .config import EXPERIMENTS, NO_WINDOW, ExperimentConfig, load_config
from .experiments import run_experiment

EXIT_OK, EXIT_VALIDATION, EXIT_IO = 0, 1, 2


def _da_window(raw: str):
    if raw.lower() in ("none", "inf", "0"):
        return NO_WINDOW
    return int(raw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="covpol", description="Lockdown diffusion model with particle filtering.")
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", help="JSON experiment config")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--particles", type=int, help="number of particles")
    parser.add_argument("--da-window", type=_da_window, help="days between assimilations ('none' disables)")
    parser.add_argument("--ensemble", type=int, help="ensemble size for unfiltered runs")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = load_config(args.config) if args.config else ExperimentConfig()
        config = config.with_overrides(
            experiment=args.experiment,
            seed=args.seed,
            particles=args.particles,
            da_window=args.da_window,
            ensemble=args.ensemble,
            out=args.out,
        )
        result = run_experiment(config)
        result.write(config.paths.out, config)
        summary = result.render(config)["summary.json"]
    except (ValidationError, ValueError) as exc:
        print(f"covpol: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"covpol: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(summary, end="")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
