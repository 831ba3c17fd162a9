"""Command-line entry point: ``entsource simulate|validate|list-scenarios``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .scenarios import SCENARIO_NAMES, run_scenario


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entsource",
        description="Simulate a two-channel polarization-entangled pair source.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one named scenario")
    sim.add_argument("scenario", choices=SCENARIO_NAMES, metavar="scenario",
                     help="one of: " + ", ".join(SCENARIO_NAMES))
    sim.add_argument("--config", type=Path, default=None,
                     help="JSON config file (default: the shipped reference config)")
    sim.add_argument("--out", type=Path, default=Path("results"),
                     help="output directory; the scenario writes into OUT/<scenario>")
    sim.add_argument("--seed", type=int, default=None,
                     help="overrides detection.seed from the config")
    sim.add_argument("--mean-total", type=float, default=None,
                     help="expected coincidences summed over one complete analyzer basis "
                          "(overrides detection.mean_total)")

    val = sub.add_parser("validate", help="check a config file and report every problem")
    val.add_argument("--config", type=Path, required=True)

    sub.add_parser("list-scenarios", help="print the scenario names")
    return parser


def _simulate(args) -> int:
    try:
        result = run_scenario(args.scenario, config=args.config, out_dir=args.out,
                              seed=args.seed, mean_total=args.mean_total)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return 1
    width = max((len(r.id) for r in result.rows), default=0)
    for row in result.rows:
        print(f"{row.status.upper():6s} {row.id:{width}s} {row.computed}")
    if not result.timing_ok:
        print("FAIL   runtime limit exceeded", file=sys.stderr)
    n_fail = len(result.failures())
    print(f"{args.scenario}: {'all checks passed' if result.passed else f'{n_fail} check(s) failed'}"
          f" -> {result.out_dir}")
    return 0 if result.passed else 1


def _validate(args) -> int:
    try:
        load_config(args.config)
    except ConfigError as exc:
        for err in exc.errors:
            print(err)
        return 1
    except OSError as exc:
        print(f"cannot read {args.config}: {exc}")
        return 1
    print(f"{args.config}: valid")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "simulate":
        return _simulate(args)
    if args.command == "validate":
        return _validate(args)
    for name in SCENARIO_NAMES:
        print(name)
    return 0


if __name__ == "__main__":
    sys.exit(main())
