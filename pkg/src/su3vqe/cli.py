"""Command-line entry point for the experiment runners.

Subcommands: krylov-scaling, optimizer-compare, gd-scaling, domain-decomp,
hardware-analogue, tebd-vacuum.  Parameters come from per-experiment
defaults, optionally overridden by --config FILE (JSON object) and by
--set KEY=VALUE flags.  Exit codes: 0 success, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import experiments as ex

EXPERIMENTS = {
    "krylov-scaling": ex.run_krylov_scaling,
    "optimizer-compare": ex.run_optimizer_comparison,
    "gd-scaling": ex.run_gd_scaling,
    "domain-decomp": ex.run_domain_decomposition,
    "hardware-analogue": ex.run_noiseless_hardware_analogues,
    "tebd-vacuum": ex.run_tebd_vacuum,
}

_PARALLEL = {"krylov-scaling", "gd-scaling"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="su3vqe",
        description="reproducible experiment runs (CSV/JSON output)")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", default=None, metavar="FILE",
                       help="JSON file with config overrides")
        p.add_argument("--set", action="append", default=[], metavar="K=V",
                       dest="assignments",
                       help="single config override, JSON-decoded value")
        p.add_argument("--out", default="out", metavar="DIR",
                       help="output directory (default: ./out)")
        p.add_argument("--jobs", type=int, default=1,
                       help="worker processes for sweep points")
        p.add_argument("--shots", type=int, default=None,
                       help="simulated measurement shots (0 = exact)")
        p.add_argument("--seed", type=int, default=None,
                       help="random seed override")
    return parser


def _decode(value: str):
    try:
        return json.loads(value)
    except json.JSONDecodeError:
        return value  # bare strings stay strings


def load_config(args) -> dict:
    overrides = {}
    if args.config:
        with open(args.config) as f:
            loaded = json.load(f)
        if not isinstance(loaded, dict):
            raise ex.ConfigError("--config file must hold a JSON object")
        overrides.update(loaded)
    for item in args.assignments:
        if "=" not in item:
            raise ex.ConfigError(f"--set needs KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key] = _decode(value)
    if args.shots is not None:
        overrides["shots"] = args.shots
    if args.seed is not None:
        overrides["seed"] = args.seed
    # validate early so config errors exit before any computation
    ex.make_config(args.experiment, overrides)
    return overrides


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
    except (ex.ConfigError, OSError, json.JSONDecodeError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    runner = EXPERIMENTS[args.experiment]
    kwargs = {"jobs": args.jobs} if args.experiment in _PARALLEL else {}
    try:
        summary = runner(config, args.out, **kwargs)
    except ex.ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except ex.NumericalFailureError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3
    print(json.dumps(summary, indent=2, sort_keys=True, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
