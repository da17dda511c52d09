"""Command-line entry point.

Subcommands:
  run      execute the configured experiment (learning runs + artifacts)
  probe    scan the throughput objective over the service area
  compare  condense several run manifests into a comparison table

Exit codes: 0 success, 1 configuration error, 2 runtime failure. The
``ARUSIM_OUT`` environment variable overrides the configured output
directory (a --out flag overrides both).
"""

import argparse
import os
import sys
from dataclasses import replace

from . import __version__
from .harness import ConfigError, compare_report, load_config, run_experiment, run_probe

_ALGO_KEYS = {"q": "qlearning", "sarsa": "sarsa", "vi": "value_iteration", "all": "all"}


def _load(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return load_config(text)


def _apply_overrides(config, args):
    if getattr(args, "algo", None):
        config = replace(config, algorithm=_ALGO_KEYS[args.algo])
    if getattr(args, "seed", None) is not None:
        config = replace(config, seeds=(args.seed,))
    out = getattr(args, "out", None) or os.environ.get("ARUSIM_OUT")
    if out:
        config = replace(config, output_dir=out)
    return config


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="arusim",
        description="Aerial radio unit trajectory simulator",
    )
    parser.add_argument("--version", action="version", version=f"arusim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the configured experiment")
    p_run.add_argument("--config", required=True, help="TOML configuration file")
    p_run.add_argument("--algo", choices=sorted(_ALGO_KEYS), help="algorithm override")
    p_run.add_argument("--seed", type=int, help="single-seed override")
    p_run.add_argument("--out", help="output directory override")

    p_probe = sub.add_parser("probe", help="scan the throughput objective")
    p_probe.add_argument("--config", required=True)
    p_probe.add_argument("--out", required=True)

    p_cmp = sub.add_parser("compare", help="compare run manifests")
    p_cmp.add_argument("--out", required=True)
    p_cmp.add_argument("--delta", type=float, default=0.1,
                       help="criterion threshold for episodes-to-criterion")
    p_cmp.add_argument("manifests", nargs="+")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            config = _apply_overrides(_load(args.config), args)
            manifest = run_experiment(config)
            print(manifest)
        elif args.command == "probe":
            config = _apply_overrides(_load(args.config), args)
            report = run_probe(config)
            print(
                f"{len(report.local_maxima)} strict local maxima; "
                f"global max {report.global_max}"
            )
        else:
            summary = compare_report(args.manifests, args.out, args.delta)
            for algo in sorted(summary):
                stats = " ".join(f"{k}={v:.4g}" for k, v in summary[algo].items())
                print(f"{algo}: {stats}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
