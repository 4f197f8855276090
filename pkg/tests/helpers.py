"""Shared fixtures and independent oracles used across the test modules."""
from __future__ import annotations

from datetime import datetime

import numpy as np

from gridaging.core import HOURS_PER_YEAR, HourlyTimeSeries, Meter, Transformer
from gridaging.ingestion import FeederData
from gridaging.thermal import AgingParams, ThermalParams

EPOCH = datetime(2024, 1, 1)


def series(values) -> HourlyTimeSeries:
    return HourlyTimeSeries(EPOCH, np.asarray(values, dtype=float))


def constant_series(value: float, n_hours: int = HOURS_PER_YEAR) -> HourlyTimeSeries:
    return HourlyTimeSeries(EPOCH, np.full(n_hours, float(value)))


def euler_minute_trace(
    load_pu: np.ndarray,
    ambient_k: np.ndarray,
    t_start: float,
    params: ThermalParams = ThermalParams(),
    substeps_per_hour: int = 60,
) -> np.ndarray:
    """Brute-force explicit-Euler integration of the hot-spot ODE.

    Integrates dT/dt = a_bar*L^2 - b*(T - Ta) + c at fine substeps with the
    hourly inputs held constant within each hour, returning end-of-hour
    temperatures.  Independent of the closed-form stepping it validates.
    """
    dt = params.dt_min / substeps_per_hour
    t = t_start
    out = np.empty(len(load_pu))
    for n in range(len(load_pu)):
        drive = params.a_bar * load_pu[n] ** 2 + params.c
        for _ in range(substeps_per_hour):
            t = t + dt * (drive - params.b * (t - ambient_k[n]))
        out[n] = t
    return out


def hourly_aging_from_trace(trace: np.ndarray, params: AgingParams = AgingParams()) -> float:
    """Accumulated age (years) from end-of-hour temperatures, one hour each."""
    rates = np.exp(-params.c_kelvin * (1.0 / trace - 1.0 / params.t_nominal_k))
    return float(rates.sum()) / HOURS_PER_YEAR


def sine_ambient_k(n_hours: int = HOURS_PER_YEAR, mean_c: float = 8.0) -> HourlyTimeSeries:
    """Smooth seasonal + diurnal ambient, coldest in January mornings."""
    hours = np.arange(n_hours)
    celsius = (
        mean_c
        - 14.0 * np.cos(2 * np.pi * (hours / 24.0 + 10) / 365.0)
        - 4.0 * np.cos(2 * np.pi * (hours % 24 - 15) / 24.0)
    )
    return HourlyTimeSeries(EPOCH, celsius + 273.15)


def make_feeder(
    n_transformers: int = 2,
    meters_per: int = 2,
    mean_kw: float = 1.0,
    rating_kva: float = 10.0,
    initial_age: float = 30.0,
    base_year: int = 2024,
    seed: int = 7,
) -> FeederData:
    """Small in-memory feeder with noisy winter-peaking baseloads."""
    rng = np.random.default_rng(seed)
    hours = np.arange(HOURS_PER_YEAR)
    shape = 1.0 + 0.4 * np.cos(2 * np.pi * (hours / 24.0) / 365.0)
    transformers = {}
    meters = {}
    for i in range(n_transformers):
        tid = f"T{i + 1:03d}"
        mids = [f"M{i + 1:03d}{j}" for j in range(meters_per)]
        for mid in mids:
            vals = mean_kw * shape * rng.lognormal(0.0, 0.2, HOURS_PER_YEAR)
            meters[mid] = Meter(
                id=mid,
                transformer_id=tid,
                baseload=HourlyTimeSeries(EPOCH, vals),
                hp_eligible=True,
                ev_eligible=True,
            )
        transformers[tid] = Transformer(
            id=tid, rating_kva=rating_kva, meters=frozenset(mids), initial_age=initial_age
        )
    return FeederData(
        transformers=transformers,
        meters=meters,
        ambient=sine_ambient_k(),
        base_year=base_year,
        initial_devices={mid: (False, False) for mid in meters},
    )


def week_fixture() -> tuple[np.ndarray, np.ndarray]:
    """168-hour overload/ambient fixture: ramped 0 -> 1.5 p.u. evening pulses
    against a +/-10 K diurnal ambient swing."""
    hours = np.arange(168)
    ambient = 293.15 + 10.0 * np.sin(2 * np.pi * (hours % 24 - 9) / 24.0)
    day_shape = np.zeros(24)
    day_shape[12:24] = [0.5, 0.9, 1.2, 1.4, 1.5, 1.5, 1.5, 1.5, 1.5, 1.2, 0.8, 0.4]
    load = np.tile(day_shape, 7)
    return load, ambient
