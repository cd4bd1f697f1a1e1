"""
Command-line front end: ``qwq <experiment> [options]``.

Exit codes: 0 success, 1 a validation check failed, 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, run

EXIT_OK, EXIT_CHECK_FAILED, EXIT_BAD_CONFIG = 0, 1, 2

# experiments whose default sigma0 is a list rather than a single value
_DEFAULT_SIGMA0 = {"fidelity-table": (1.0, 2.0, 3.0, 5.0, 10.0)}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qwq",
        description="Two-walker quantum-walk experiments: exact dynamics, Gaussian model and quantumness quantifiers.",
    )
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--sigma0", type=float, nargs="+", help="initial width(s); default 5, or 1 2 3 5 10 for fidelity-table")
    p.add_argument("--alpha", type=float, default=0.0, help="spin angle of the single-walker profile")
    p.add_argument("--epsilon", type=float, nargs="+", default=[1.0], help="singlet weight(s) of the noisy spin state")
    p.add_argument("--t-max", type=int, help="last time step (default ceil(5 sigma0))")
    p.add_argument("--t-step", type=int, default=1)
    p.add_argument("--times", type=int, nargs="+", default=[50, 100], help="time steps of the fidelity table")
    p.add_argument("--n-theta", type=int, default=65, help="azimuth points of the irreality map")
    p.add_argument("--n-phi", type=int, default=33, help="polar points of the irreality map")
    p.add_argument("--n-directions", type=int, default=200, help="random directions for irreality-scaled")
    p.add_argument("--initial", choices=("singlet", "updown"), default="singlet")
    p.add_argument("--exact", action="store_true", help="add exact-simulation columns to quantifier-sweep")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--plot", action="store_true", help="also write a PNG figure next to --out")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    sigma0 = tuple(args.sigma0) if args.sigma0 else _DEFAULT_SIGMA0.get(args.experiment, (5.0,))
    return ExperimentConfig(
        experiment=args.experiment,
        sigma0=sigma0,
        alpha=args.alpha,
        epsilon=tuple(args.epsilon),
        t_max=args.t_max,
        t_step=args.t_step,
        times=tuple(args.times),
        n_theta=args.n_theta,
        n_phi=args.n_phi,
        n_directions=args.n_directions,
        initial=args.initial,
        exact=args.exact,
        seed=args.seed,
        out=args.out,
        fmt=args.fmt,
    )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on bad flags, 0 on --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    if args.plot and not args.out:
        print("qwq: --plot needs --out", file=sys.stderr)
        return EXIT_BAD_CONFIG
    try:
        cfg = config_from_args(args)
        table = run(cfg)
    except ConfigError as exc:
        print(f"qwq: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except ValueError as exc:
        print(f"qwq: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG

    if cfg.out:
        table.write(cfg.out, cfg.fmt)
        if args.plot:
            from .plotting import plot_table

            plot_table(table, Path(cfg.out).with_suffix(".png"))
    else:
        sys.stdout.write(table.dumps(cfg.fmt))
    print(f"qwq: {cfg.experiment} finished in {table.wall_time:.2f} s", file=sys.stderr)

    if cfg.experiment == "validate":
        failed = [r[0] for r in table.rows if not r[4]]
        for name in failed:
            print(f"qwq: check failed: {name}", file=sys.stderr)
        return EXIT_CHECK_FAILED if failed else EXIT_OK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
