"""Command-line interface: run one experiment, sweep horizons, or verify.

    gaugeoco run --config cfg.json [--seed N] [--out DIR] [--full-interval-scan]
    gaugeoco sweep --config cfg.json --horizons 100,1000,10000 [--out DIR]
    gaugeoco verify
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .runner import ExperimentConfig, run_experiment, run_sweep
from .verify import run_verify


def _load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return ExperimentConfig.from_dict(json.load(fh))


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="gaugeoco", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one configured experiment")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default="out")
    p_run.add_argument("--full-interval-scan", action="store_true")

    p_sweep = sub.add_parser("sweep", help="run the config across horizons")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--horizons", required=True, help="comma-separated, e.g. 100,1000")
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--out", default="out")

    sub.add_parser("verify", help="run the fast invariant suite")

    args = parser.parse_args(argv)

    if args.command == "verify":
        return run_verify()

    config = _load_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)

    if args.command == "run":
        if args.full_interval_scan:
            config = replace(config, full_interval_scan=True)
        report = run_experiment(config, args.out)
        print(json.dumps(report.summary, indent=2, sort_keys=True))
        return 0

    horizons = [int(t) for t in args.horizons.split(",") if t]
    sweep = run_sweep(config, horizons, args.out)
    print(
        json.dumps(
            {
                "horizons": sweep.horizons,
                "cumulative_regrets": sweep.cumulative_regrets,
                "interval_max_regrets": sweep.interval_max_regrets,
                "cumulative_slope": sweep.cumulative_slope.slope,
                "interval_slope": sweep.interval_slope.slope,
            },
            indent=2,
        )
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
