"""Batch command-line surface: genfeeder -> simulate -> schedule -> report.

Exit codes: 0 success, 1 usage error, 2 data/config validation error,
3 internal error.  All randomness flows from the configured seed.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import traceback
from typing import Optional

import numpy as np

from .adoption import GrowthCurve, fit_timescale
from .core import ConfigError, DataError, FailureCurveSet, ScenarioConfig
from .ingestion import load_feeder
from .montecarlo import run_simulation, write_summary
from .scheduler import (
    CostModel,
    Schedule,
    expected_failures,
    read_schedule,
    solve_schedule,
    write_expected_failures,
    write_schedule,
)
from .synth import FeederSpec, generate_feeder

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

# (t50_hp, t50_ev) presets for the growth scenarios
SCENARIOS = {
    "low": (2050.0, 2060.0),
    "medium": (2040.0, 2045.0),
    "high": (2035.0, 2035.0),
}

_CONFIG_TYPES = {
    "t50_hp": float,
    "t50_ev": float,
    "base_year": int,
    "horizon_years": int,
    "realizations": int,
    "master_seed": int,
    "f_max": float,
    "hp_winter_threshold_kw": float,
    "ev_mean_threshold_kw": float,
    "capacity_scale": float,
    "cost_upgrade": float,
    "cost_failure": float,
    "return_rate": float,
    "n_max": int,
    "a_hp": float,
    "a_ev": float,
    "f0_fallback": float,
    "hp_cop": float,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures to exit code 1
        raise UsageError(message)


def parse_config_file(path) -> dict:
    """Flat `key = value` text; '#' starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in _CONFIG_TYPES:
                raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
            try:
                values[key] = _CONFIG_TYPES[key](val)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {val!r}") from exc
    return values


def build_config(args) -> ScenarioConfig:
    values: dict = {}
    if args.config:
        values.update(parse_config_file(args.config))
    if args.scenario:
        if args.scenario not in SCENARIOS:
            raise UsageError(f"unknown scenario {args.scenario!r}; pick from {sorted(SCENARIOS)}")
        values["t50_hp"], values["t50_ev"] = SCENARIOS[args.scenario]
    for key, flag in [
        ("realizations", "realizations"),
        ("master_seed", "seed"),
        ("horizon_years", "years"),
        ("capacity_scale", "capacity_scale"),
    ]:
        override = getattr(args, flag, None)
        if override is not None:
            values[key] = override
    return ScenarioConfig(**values)


def fit_growth_curves(
    config: ScenarioConfig, initial_devices: dict[str, tuple[bool, bool]]
) -> tuple[GrowthCurve, GrowthCurve]:
    """Fit the logistic timescales to the observed installed-device fractions."""
    total = max(len(initial_devices), 1)
    f0_hp = sum(1 for hp, _ in initial_devices.values() if hp) / total
    f0_ev = sum(1 for _, ev in initial_devices.values() if ev) / total
    base = config.base_year
    if base is None:
        raise ConfigError("base_year must be known before fitting growth curves")

    def curve(t50: float, a_override: Optional[float], f0: float) -> GrowthCurve:
        if a_override is not None:
            return GrowthCurve(config.f_max, t50, a_override)
        if f0 <= 0 or f0 >= config.f_max / 2:
            f0 = config.f0_fallback
        return GrowthCurve(config.f_max, t50, fit_timescale(f0, base, t50, config.f_max))

    return (
        curve(config.t50_hp, config.a_hp, f0_hp),
        curve(config.t50_ev, config.a_ev, f0_ev),
    )


def cmd_simulate(args) -> int:
    config = build_config(args)
    feeder = load_feeder(args.input, config)
    if config.base_year is None:
        config = dataclasses.replace(config, base_year=feeder.base_year)
    curve_hp, curve_ev = fit_growth_curves(config, feeder.initial_devices)
    curves, summary = run_simulation(
        feeder, config, curve_hp, curve_ev, workers=args.threads
    )
    os.makedirs(args.output, exist_ok=True)
    curves.to_csv(os.path.join(args.output, "failure_curves.csv"))
    write_summary(summary, os.path.join(args.output, "summary.json"))
    print(f"wrote failure curves for {len(curves.transformer_ids)} transformers "
          f"over {curves.horizon} years to {args.output}")
    return EXIT_OK


def cmd_schedule(args) -> int:
    curves = FailureCurveSet.from_csv(args.curves)
    model = CostModel(
        upgrade_cost=args.cu, failure_cost=args.cf, return_rate=args.rate
    )
    schedule, objective = solve_schedule(model, curves, args.nmax)
    os.makedirs(args.output, exist_ok=True)
    write_schedule(schedule, os.path.join(args.output, "schedule.csv"))
    write_expected_failures(
        curves, schedule, os.path.join(args.output, "expected_failures.csv")
    )
    print(f"objective {objective:.6g}")
    print(f"scheduled {len(schedule.upgrades)} upgrades (n_max {args.nmax})")
    return EXIT_OK


def cmd_report(args) -> int:
    curves = FailureCurveSet.from_csv(args.curves)
    schedule = read_schedule(args.schedule) if args.schedule else Schedule({})
    os.makedirs(args.output, exist_ok=True)

    k = min(args.top_k, len(curves.transformer_ids))
    order = np.argsort(-curves.curves[:, -1], kind="stable")[:k]
    with open(os.path.join(args.output, "top_risk_curves.csv"), "w",
              encoding="utf-8", newline="\n") as f:
        f.write("transformer_id,year,mean_F\n")
        for i in order:
            tid = curves.transformer_ids[i]
            for t in range(curves.horizon):
                f.write(f"{tid},{t + 1},{curves.curves[i, t]:.12g}\n")

    write_expected_failures(
        curves, schedule, os.path.join(args.output, "expected_failures.csv")
    )
    total = float(expected_failures(curves, schedule).sum())
    print(f"top-{k} risk curves and expected failures written to {args.output}")
    print(f"total expected failures over horizon: {total:.4f}")
    return EXIT_OK


def cmd_genfeeder(args) -> int:
    spec = FeederSpec(
        n_transformers=args.transformers,
        min_meters=args.min_meters,
        max_meters=args.max_meters,
        seed=args.seed,
        base_year=args.base_year,
    )
    paths = generate_feeder(spec, args.output)
    print(f"wrote synthetic feeder ({args.transformers} transformers) to {args.output}")
    for name in sorted(paths):
        print(f"  {name}: {paths[name]}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="gridaging", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the Monte Carlo failure-risk simulation")
    p.add_argument("--input", required=True, help="directory with feeder input CSVs")
    p.add_argument("--output", required=True, help="directory for results")
    p.add_argument("--config", help="key=value scenario config file")
    p.add_argument("--scenario", help="growth preset: low, medium, or high")
    p.add_argument("--realizations", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--years", type=int)
    p.add_argument("--capacity-scale", dest="capacity_scale", type=float)
    p.add_argument("--threads", type=int, default=os.cpu_count())
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("schedule", help="optimize the upgrade schedule")
    p.add_argument("--curves", required=True, help="failure_curves.csv from simulate")
    p.add_argument("--output", required=True)
    p.add_argument("--cu", type=float, default=5.0, help="upgrade cost (thousands)")
    p.add_argument("--cf", type=float, default=50.0, help="failure cost (thousands)")
    p.add_argument("--rate", type=float, default=0.02, help="yearly return rate")
    p.add_argument("--nmax", type=int, default=10, help="upgrades allowed per year")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("report", help="emit plot-ready CSV summaries")
    p.add_argument("--curves", required=True)
    p.add_argument("--schedule", help="schedule.csv; omit for the no-upgrade baseline")
    p.add_argument("--output", required=True)
    p.add_argument("--top-k", dest="top_k", type=int, default=25)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("genfeeder", help="generate a synthetic feeder dataset")
    p.add_argument("--output", required=True)
    p.add_argument("--transformers", type=int, default=50)
    p.add_argument("--min-meters", dest="min_meters", type=int, default=1)
    p.add_argument("--max-meters", dest="max_meters", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--base-year", dest="base_year", type=int, default=2024)
    p.set_defaults(func=cmd_genfeeder)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


def main_entry() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    main_entry()
