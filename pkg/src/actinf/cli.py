"""Command-line entry point.

    actinf --config experiment.yaml [--seed 7] [--steps 20] [--mode NAME]
           [--gamma 2.5] [--out DIR] [--enable-exact-oracle true]
           [--enum-cap 100000] [--compare mode1,mode2]

Flags override the corresponding config fields; the manifest written next
to the other outputs records the values that actually ran. Exit codes:
0 success, 2 configuration problems, 1 runtime failures.
"""

import argparse
import logging
import sys

from .errors import ActinfError, AgentStepError, ConfigError
from .agents import MODES
from .config import load_config
from .runner import compare_modes, run_experiment


def _parse_bool(text):
    low = text.lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="actinf",
        description="Run a simulated perception-action loop with an "
                    "inference-driven agent.")
    parser.add_argument("--config", required=True, help="experiment YAML file")
    parser.add_argument("--seed", type=int, default=None, help="override run.seed")
    parser.add_argument("--steps", type=int, default=None, help="override run.steps")
    parser.add_argument("--mode", choices=MODES, default=None, help="override agent.mode")
    parser.add_argument("--gamma", type=float, default=None, help="override agent.gamma")
    parser.add_argument("--out", default=None, help="override output.directory")
    parser.add_argument("--enable-exact-oracle", type=_parse_bool, default=None,
                        metavar="BOOL", help="override run.enable_exact_oracle")
    parser.add_argument("--enum-cap", type=int, default=None,
                        help="override the model's enumeration cap")
    parser.add_argument("--compare", default=None, metavar="MODES",
                        help="comma-separated agent modes to run side by side "
                             "instead of a single experiment")
    parser.add_argument("--quiet", action="store_true", help="suppress progress logging")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s")

    overrides = {
        "seed": args.seed,
        "steps": args.steps,
        "mode": args.mode,
        "gamma": args.gamma,
        "out": args.out,
        "enable_exact_oracle": args.enable_exact_oracle,
        "enum_cap": args.enum_cap,
    }
    try:
        config = load_config(args.config, overrides=overrides)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2

    try:
        if args.compare:
            modes = [m.strip() for m in args.compare.split(",") if m.strip()]
            for mode in modes:
                if mode not in MODES:
                    print(f"configuration error: unknown mode {mode!r} in --compare",
                          file=sys.stderr)
                    return 2
            compare_modes(config, modes)
        else:
            run_experiment(config)
    except AgentStepError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1
    except ActinfError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
