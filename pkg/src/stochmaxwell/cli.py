"""Command-line entry point.

Examples::

    stochmaxwell --experiment energy --out results/
    stochmaxwell --experiment order --threads 8 --seed 7
    stochmaxwell --config runs.ini --experiment order --full-scale
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import EXPERIMENTS, METHODS, ConfigError, read_ini, resolve
from .experiments import run_experiment


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="stochmaxwell",
        description="Energy-preserving splitting experiments for 3D stochastic Maxwell equations.",
    )
    p.add_argument("--config", help="INI file with a [common] section and one section per experiment")
    p.add_argument("--experiment", choices=EXPERIMENTS, help="experiment to run (default: energy)")
    p.add_argument("--out", help="output directory for CSV files (default: results)")
    p.add_argument("--threads", type=int, help="worker threads for independent runs and paths")
    p.add_argument("--seed", type=int, help="unsigned 64-bit noise seed")
    p.add_argument("--method", choices=METHODS, help="splitting method (default: both)")
    p.add_argument(
        "--full-scale", action="store_true", default=None,
        help="order experiment on the 25^3 grid with tau = 2^-4..2^-8 (about 20 s for 10 paths on one core)",
    )
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        ini = read_ini(args.config) if args.config else None
        cfg = resolve(
            args.experiment, ini,
            {"out": args.out, "threads": args.threads, "seed": args.seed, "method": args.method, "full_scale": args.full_scale},
        )
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    try:
        res = run_experiment(cfg)
    except OSError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 1
    for line in res.summary:
        print(line)
    for path in res.files:
        print(f"wrote {path}")
    for f in res.failures:
        print(f"FAIL {f}", file=sys.stderr)
    return 0 if res.ok else 1


if __name__ == "__main__":
    sys.exit(main())
