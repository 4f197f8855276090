"""Deterministic synthetic feeder and weather generator for tests and demos."""
from __future__ import annotations

import os
from dataclasses import dataclass
from datetime import date, datetime, timedelta

import numpy as np

from .core import (
    DAYS_PER_YEAR,
    HOURS_PER_DAY,
    HOURS_PER_YEAR,
    ConfigError,
    HourlyTimeSeries,
    Transformer,
)
from .ingestion import (
    AMI_FILE,
    DEVICES_FILE,
    METER_MAP_FILE,
    TEMPERATURE_FILE,
    TRANSFORMERS_FILE,
    DailyTemperatureRecord,
    write_ami,
    write_devices,
    write_temperature,
    write_topology,
)

# Standard pole-top sizes; each step is roughly a 50% increase, so a
# capacity_scale of 1.5 models "replace with the next size up".
RATING_PALETTE_KVA = (10.0, 15.0, 25.0, 37.5, 50.0, 75.0)

COLD_SNAP_DAY = 328  # late November in the 365-day year
HEAT_WAVE_DAYS = (195, 196, 197)  # mid July


@dataclass(frozen=True)
class FeederSpec:
    n_transformers: int = 50
    min_meters: int = 1
    max_meters: int = 3
    rating_palette: tuple[float, ...] = RATING_PALETTE_KVA
    mean_kw_range: tuple[float, float] = (0.3, 2.2)
    vacant_fraction: float = 0.1  # meters below the adoption thresholds
    initial_hp_fraction: float = 0.05
    initial_ev_fraction: float = 0.05
    aged_fraction: float = 0.15
    base_year: int = 2024
    seed: int = 0

    def __post_init__(self):
        if self.n_transformers < 1 or self.min_meters < 1 or self.max_meters < self.min_meters:
            raise ConfigError("feeder spec counts must be positive and ordered")
        if any(r <= 0 for r in self.rating_palette):
            raise ConfigError("rating palette values must be positive")


def generate_temperature(spec: FeederSpec, rng: np.random.Generator) -> list[DailyTemperatureRecord]:
    """Sinusoidal annual cycle with one cold-snap day and a summer heat wave."""
    days = np.arange(DAYS_PER_YEAR)
    mean = 8.0 - 14.0 * np.cos(2 * np.pi * (days + 10) / DAYS_PER_YEAR)
    mean += rng.normal(0.0, 2.0, DAYS_PER_YEAR)
    spread = rng.uniform(4.0, 10.0, DAYS_PER_YEAR)
    tmin = np.maximum(mean - spread / 2, -18.0)  # keep the cold snap unique
    tmax = tmin + spread
    tmin[COLD_SNAP_DAY], tmax[COLD_SNAP_DAY] = -25.0, -13.0
    for d in HEAT_WAVE_DAYS:
        tmin[d], tmax[d] = 22.0, 36.0

    records = []
    day = date(spec.base_year, 1, 1)
    for d in range(DAYS_PER_YEAR):
        if day.month == 2 and day.day == 29:
            day += timedelta(days=1)
        records.append(DailyTemperatureRecord(day, round(tmin[d], 2), round(tmax[d], 2)))
        day += timedelta(days=1)
    return records


def generate_baseload(
    mean_kw: float, rng: np.random.Generator, base_year: int
) -> HourlyTimeSeries:
    """Residential shape: winter-peaking, evening-peaking, lognormal noise."""
    hours = np.arange(HOURS_PER_YEAR)
    doy = hours // HOURS_PER_DAY
    hod = hours % HOURS_PER_DAY
    seasonal = 1.0 + 0.45 * np.cos(2 * np.pi * (doy - 15) / DAYS_PER_YEAR)
    diurnal = 1.0 + 0.35 * np.cos(2 * np.pi * (hod - 19) / HOURS_PER_DAY)
    noise = rng.lognormal(mean=-0.045, sigma=0.3, size=HOURS_PER_YEAR)
    values = mean_kw * seasonal * diurnal * noise
    return HourlyTimeSeries(datetime(base_year, 1, 1), np.maximum(values, 0.0))


def generate_feeder(spec: FeederSpec, out_dir) -> dict[str, str]:
    """Write the five ingestion-format files; byte-identical per seed."""
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    palette = np.asarray(sorted(spec.rating_palette))

    transformers: dict[str, Transformer] = {}
    loads = {}
    devices = {}
    meter_counter = 0
    for i in range(spec.n_transformers):
        tid = f"T{i + 1:04d}"
        n_meters = int(rng.integers(spec.min_meters, spec.max_meters + 1))
        meter_ids = []
        peak_estimate = 0.0
        for _ in range(n_meters):
            meter_counter += 1
            mid = f"M{meter_counter:05d}"
            meter_ids.append(mid)
            if rng.random() < spec.vacant_fraction:
                mean_kw = rng.uniform(0.02, 0.1)  # vacant / seasonal home
            else:
                mean_kw = rng.uniform(*spec.mean_kw_range)
            loads[mid] = generate_baseload(mean_kw, rng, spec.base_year)
            peak_estimate += mean_kw * 2.2
            devices[mid] = (
                rng.random() < spec.initial_hp_fraction,
                rng.random() < spec.initial_ev_fraction,
            )
        # headroom below 1 yields the minority of tightly-sized units that
        # carry most of the failure risk once devices are added
        headroom = rng.uniform(0.5, 2.5)
        target = peak_estimate * headroom
        rating = float(palette[min(np.searchsorted(palette, target), len(palette) - 1)])
        initial_age = float(rng.uniform(5.0, 60.0)) if rng.random() < spec.aged_fraction else 0.0
        transformers[tid] = Transformer(
            id=tid,
            rating_kva=rating,
            meters=frozenset(meter_ids),
            initial_age=round(initial_age, 2),
        )

    records = generate_temperature(spec, rng)

    paths = {
        "transformers": os.path.join(out_dir, TRANSFORMERS_FILE),
        "meters": os.path.join(out_dir, METER_MAP_FILE),
        "ami": os.path.join(out_dir, AMI_FILE),
        "devices": os.path.join(out_dir, DEVICES_FILE),
        "temperature": os.path.join(out_dir, TEMPERATURE_FILE),
    }
    write_topology(transformers, paths["transformers"], paths["meters"])
    write_ami(loads, paths["ami"])
    write_devices(devices, paths["devices"])
    write_temperature(records, paths["temperature"])
    return paths
