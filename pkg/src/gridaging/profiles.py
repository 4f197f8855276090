"""Stochastic per-device heat-pump and EV hourly load profiles."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .core import HOURS_PER_DAY, HourlyTimeSeries, StructuralError

BTU_HR_TO_KW = 2.9307e-4

HP_WEIBULL_SHAPE = 1.73
HP_WEIBULL_SCALE_BTU = 23700.0
HP_SHIFT_BTU = 7000.0
HP_T_REF_C = 22.0
HP_ALPHA_C = 25.0

EV_DISTANCE_SHAPE = 1.53
EV_TAU_RANGE = (25.0, 37.0)
EV_EFFICIENCY_RANGE = (2.0, 5.0)
EV_BATTERY_RANGE = (50.0, 120.0)
EV_THRESHOLD_RANGE = (0.4, 0.6)
EV_INITIAL_LEVEL = 0.7
CHARGE_RATE_KW = 7.2
CHARGE_EFFICIENCY = 0.85
PLUG_IN_MEAN_H = 6.5  # hours after noon
PLUG_IN_SD_H = 1.5
PLUG_IN_LATEST_H = 11.0 + 59.0 / 60.0  # 23:59


@dataclass(frozen=True)
class HpDevice:
    size_btu_hr: float
    peak_electric_kw: float
    t_ref_c: float = HP_T_REF_C
    alpha_c: float = HP_ALPHA_C


@dataclass(frozen=True)
class EvDevice:
    tau_miles: float
    efficiency_mi_per_kwh: float
    battery_kwh: float
    charge_threshold: float
    battery_level: float = EV_INITIAL_LEVEL
    charge_rate_kw: float = CHARGE_RATE_KW
    charge_eff: float = CHARGE_EFFICIENCY


@dataclass(frozen=True)
class EvProfileResult:
    load_kw: np.ndarray  # one value per hour of the requested window
    tail_kw: np.ndarray  # spill-over past the window (last session crossing the end)
    end_level: float
    session_energies_kwh: tuple[float, ...]


def sample_hp_sizes(rng: np.random.Generator, n: int) -> np.ndarray:
    """Shifted-Weibull nameplate heating capacities in BTU/hr."""
    return HP_SHIFT_BTU + HP_WEIBULL_SCALE_BTU * rng.weibull(HP_WEIBULL_SHAPE, n)


def sample_hp_device(rng: np.random.Generator, cop: float = 2.0) -> HpDevice:
    """One heat pump; electric peak via a fixed cold-weather COP."""
    size = float(sample_hp_sizes(rng, 1)[0])
    return HpDevice(size_btu_hr=size, peak_electric_kw=size * BTU_HR_TO_KW / cop)


def hp_profile(device: HpDevice, temperature_c: np.ndarray) -> np.ndarray:
    """Electric draw rises linearly away from the set point, clamped at peak."""
    frac = np.minimum(np.abs(temperature_c - device.t_ref_c) / device.alpha_c, 1.0)
    return device.peak_electric_kw * frac


def sample_daily_distances(rng: np.random.Generator, tau_miles: float, n_days: int) -> np.ndarray:
    """Weibull-distributed miles driven per day for one vehicle."""
    return rng.weibull(EV_DISTANCE_SHAPE, n_days) * tau_miles


def sample_ev_device(rng: np.random.Generator) -> EvDevice:
    return EvDevice(
        tau_miles=rng.uniform(*EV_TAU_RANGE),
        efficiency_mi_per_kwh=rng.uniform(*EV_EFFICIENCY_RANGE),
        battery_kwh=rng.uniform(*EV_BATTERY_RANGE),
        charge_threshold=rng.uniform(*EV_THRESHOLD_RANGE),
    )


def ev_profile(
    rng: np.random.Generator,
    device: EvDevice,
    n_days: int,
    start_level: Optional[float] = None,
) -> EvProfileResult:
    """Daily-driving battery walk with evening charge-to-full sessions.

    Each day's distance is Weibull-distributed; when the battery drops below
    the owner's threshold, a session starts between 12:00 and 23:59 (normal
    draw of hours past noon) and runs uninterrupted at the rated power until
    the grid has delivered battery_deficit / charge_eff, crossing midnight
    if needed.  ``tail_kw`` holds energy deposited past the requested window
    by a session still running at its end.
    """
    if n_days < 1:
        raise StructuralError("n_days must be >= 1")
    n_hours = n_days * HOURS_PER_DAY
    buf = np.zeros(n_hours + 2 * HOURS_PER_DAY)  # room for one spill-over session
    level = device.battery_level if start_level is None else start_level
    per_mile = 1.0 / (device.efficiency_mi_per_kwh * device.battery_kwh)
    drops = (sample_daily_distances(rng, device.tau_miles, n_days) * per_mile).tolist()
    threshold = device.charge_threshold
    sessions = []
    for d, drop in enumerate(drops):
        level = max(0.0, level - drop)
        if level < threshold:
            offset = min(max(rng.normal(PLUG_IN_MEAN_H, PLUG_IN_SD_H), 0.0), PLUG_IN_LATEST_H)
            start = d * HOURS_PER_DAY + 12.0 + offset
            grid_kwh = device.battery_kwh * (1.0 - level) / device.charge_eff
            _deposit(buf, start, grid_kwh / device.charge_rate_kw, device.charge_rate_kw)
            sessions.append(grid_kwh)
            level = 1.0
    return EvProfileResult(
        load_kw=buf[:n_hours],
        tail_kw=buf[n_hours:],
        end_level=level,
        session_energies_kwh=tuple(sessions),
    )


def _deposit(buf: np.ndarray, start: float, duration: float, rate: float) -> None:
    end = start + duration
    first, last = int(start), min(int(end), len(buf) - 1)
    if first == last:
        buf[first] += rate * duration
        return
    buf[first] += rate * (first + 1 - start)
    if last > first + 1:
        buf[first + 1 : last] += rate  # interior hours run flat at the rated power
    buf[last] += rate * (end - last)


def total_meter_load(
    baseload: HourlyTimeSeries,
    hp_kw: Optional[np.ndarray] = None,
    ev_kw: Optional[np.ndarray] = None,
) -> HourlyTimeSeries:
    """Baseload plus whatever device profiles the meter has."""
    total = baseload.values
    for extra in (hp_kw, ev_kw):
        if extra is None:
            continue
        if len(extra) != len(total):
            raise StructuralError("device profile length does not match baseload")
        total = total + extra
    return HourlyTimeSeries(baseload.epoch, total)
