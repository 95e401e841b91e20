"""Command-line harness: truth simulation, full estimation runs, sweeps."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .errors import ConfigError, EstimationError, ParseError
from .harness import (ExperimentConfig, load_config, reference_config,
                      run_experiment, save_config, truth_log, write_log)
from .truthsim import SimConfig

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None,
                   help="config file; defaults to the built-in reference experiment")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override the noise seed")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--noise-width", type=float, default=None,
                   help="override the position bump-noise half width (m)")
    p.add_argument("--velocity-mode", choices=("direct", "gyro", "points"),
                   default=None, help="override the velocity sensing mode")
    p.add_argument("--no-noise", action="store_true",
                   help="zero all noise widths")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="se3est",
        description="Variational pose and velocity estimation on SE(3).")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate the truth trajectory only")
    _add_common(p_sim)

    p_run = sub.add_parser("run", help="run the full estimation pipeline")
    _add_common(p_run)
    _add_run_flags(p_run)

    p_sweep = sub.add_parser("sweep", help="repeat the run over dt or noise widths")
    _add_common(p_sweep)
    _add_run_flags(p_sweep)
    group = p_sweep.add_mutually_exclusive_group(required=True)
    group.add_argument("--dt-values", type=str, default=None,
                       help="comma-separated step sizes, one run per value")
    group.add_argument("--noise-widths", type=str, default=None,
                       help="comma-separated bump widths, one run per value")

    p_cfg = sub.add_parser("write-config", help="write the default config file")
    p_cfg.add_argument("--out", type=Path, default=Path("experiment.cfg"))
    return parser


def _load(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else reference_config()
    noise = config.sensors.noise
    if args.seed is not None:
        noise = replace(noise, seed=args.seed)
    if getattr(args, "no_noise", False):
        noise = replace(noise, bump_width=0.0, velocity_width=0.0, gyro_width=0.0)
    elif getattr(args, "noise_width", None) is not None:
        noise = replace(noise, bump_width=args.noise_width)
    config = replace(config, sensors=replace(config.sensors, noise=noise))
    if getattr(args, "velocity_mode", None):
        config = replace(config, estimator=replace(
            config.estimator, velocity_mode=args.velocity_mode))
    return config


def _with_dt(config: ExperimentConfig, dt: float) -> ExperimentConfig:
    sim = config.sim
    return replace(config, sim=SimConfig(
        dt=dt, duration=sim.duration, body=sim.body, wrench=sim.wrench,
        initial=sim.initial, wrench_name=sim.wrench_name))


def _with_width(config: ExperimentConfig, width: float) -> ExperimentConfig:
    noise = replace(config.sensors.noise, bump_width=width)
    return replace(config, sensors=replace(config.sensors, noise=noise))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "write-config":
            save_config(reference_config(), args.out)
            print(f"wrote {args.out}")
            return 0
        config = _load(args)
        args.out.mkdir(parents=True, exist_ok=True)
        if args.command == "simulate":
            path = args.out / "truth.csv"
            write_log(truth_log(config), path)
            print(f"wrote {path}")
        elif args.command == "run":
            path = args.out / "run.csv"
            write_log(run_experiment(config), path)
            print(f"wrote {path}")
        elif args.command == "sweep":
            if args.dt_values:
                for dt in (float(x) for x in args.dt_values.split(",")):
                    path = args.out / f"run_dt{dt:g}.csv"
                    write_log(run_experiment(_with_dt(config, dt)), path)
                    print(f"wrote {path}")
            else:
                for w in (float(x) for x in args.noise_widths.split(",")):
                    path = args.out / f"run_width{w:g}.csv"
                    write_log(run_experiment(_with_width(config, w)), path)
                    print(f"wrote {path}")
        return 0
    except (ConfigError, ParseError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except EstimationError as err:
        # NoConvergence, RankDeficient etc. carry the step index in the message.
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
