"""Parsers and writers for feeder topology, AMI loads, device records, and weather.

All inputs are UTF-8 CSV files with a header row; formats are documented in
docs/formats.md.  Ambient temperature is built from daily min/max records
with a cosine diurnal shape anchored at 06:00 (minimum) and 15:00 (maximum).
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from typing import Mapping, Optional

import numpy as np
import pandas as pd

from .core import (
    DAYS_PER_YEAR,
    HOURS_PER_DAY,
    HOURS_PER_YEAR,
    KELVIN_OFFSET,
    DataError,
    HourlyTimeSeries,
    Meter,
    ScenarioConfig,
    StructuralError,
    TopologyError,
    Transformer,
)

TRANSFORMERS_FILE = "transformers.csv"
METER_MAP_FILE = "meters.csv"
AMI_FILE = "ami.csv"
DEVICES_FILE = "devices.csv"
TEMPERATURE_FILE = "temperature.csv"

MIN_ANCHOR_HOUR = 6.0
MAX_ANCHOR_HOUR = 15.0
MAX_MISSING_FRACTION = 0.05

# Month of each hour in the canonical 365-day year (non-leap calendar).
_MONTH_OF_HOUR = np.repeat(
    [(date(2001, 1, 1) + timedelta(days=d)).month for d in range(DAYS_PER_YEAR)],
    HOURS_PER_DAY,
)
WINTER_HOURS = np.isin(_MONTH_OF_HOUR, (12, 1, 2))


@dataclass(frozen=True)
class DailyTemperatureRecord:
    day: date
    t_min_c: float
    t_max_c: float

    def __post_init__(self):
        if not (np.isfinite(self.t_min_c) and np.isfinite(self.t_max_c)):
            raise DataError(f"{self.day}: non-finite temperature")
        if self.t_min_c > self.t_max_c:
            raise DataError(f"{self.day}: t_min {self.t_min_c} exceeds t_max {self.t_max_c}")


@dataclass(frozen=True)
class FeederData:
    """Validated, simulation-ready view of one feeder's input files."""

    transformers: dict[str, Transformer]
    meters: dict[str, Meter]
    ambient: HourlyTimeSeries  # kelvin
    base_year: int
    initial_devices: dict[str, tuple[bool, bool]] = field(default_factory=dict)


def parse_topology(
    transformers_path, meters_path
) -> tuple[dict[str, Transformer], dict[str, str]]:
    """Read transformer ratings and the meter->transformer map."""
    tdf = pd.read_csv(transformers_path, dtype={"transformer_id": str})
    _require_columns(tdf, ["transformer_id", "rating_kva", "initial_age_years"], transformers_path)
    if tdf["transformer_id"].duplicated().any():
        dup = tdf["transformer_id"][tdf["transformer_id"].duplicated()].iloc[0]
        raise TopologyError(f"duplicate transformer id {dup}")

    mdf = pd.read_csv(meters_path, dtype=str)
    _require_columns(mdf, ["meter_id", "transformer_id"], meters_path)
    if mdf["meter_id"].duplicated().any():
        dup = mdf["meter_id"][mdf["meter_id"].duplicated()].iloc[0]
        raise TopologyError(f"meter {dup} mapped more than once")

    known = set(tdf["transformer_id"])
    meter_map: dict[str, str] = {}
    for mid, tid in zip(mdf["meter_id"], mdf["transformer_id"]):
        if tid not in known:
            raise TopologyError(f"meter {mid} references unknown transformer {tid}")
        meter_map[mid] = tid

    downstream: dict[str, set[str]] = {tid: set() for tid in known}
    for mid, tid in meter_map.items():
        downstream[tid].add(mid)

    transformers = {}
    for row in tdf.itertuples(index=False):
        transformers[row.transformer_id] = Transformer(
            id=row.transformer_id,
            rating_kva=float(row.rating_kva),
            meters=frozenset(downstream[row.transformer_id]),
            initial_age=float(row.initial_age_years),
        )
    return transformers, meter_map


def parse_devices(path) -> dict[str, tuple[bool, bool]]:
    """Read existing HP/EV installations per meter."""
    df = pd.read_csv(path, dtype=str)
    _require_columns(df, ["meter_id", "has_hp", "has_ev"], path)
    out = {}
    for row in df.itertuples(index=False):
        if row.meter_id in out:
            raise DataError(f"duplicate device record for meter {row.meter_id}")
        out[row.meter_id] = (_parse_bool(row.has_hp, path), _parse_bool(row.has_ev, path))
    return out


def parse_ami(path, base_year: Optional[int] = None) -> dict[str, HourlyTimeSeries]:
    """Read long-format AMI readings into per-meter 8760-hour series.

    February 29 is dropped; gaps are filled with the same hour of the
    previous day (next day for gaps on the first day).  Meters missing
    more than 5% of hours are rejected.
    """
    df = pd.read_csv(path, dtype={"meter_id": str})
    _require_columns(df, ["meter_id", "timestamp_iso8601", "kw"], path)
    ts = pd.to_datetime(df["timestamp_iso8601"])
    years = ts.dt.year
    if years.nunique() != 1:
        raise DataError(f"{path}: AMI data spans multiple years {sorted(years.unique())}")
    year = int(years.iloc[0])
    if base_year is not None and year != base_year:
        raise DataError(f"{path}: AMI data is for {year}, expected base year {base_year}")

    negative = df["kw"] < 0
    if negative.any():
        i = int(np.flatnonzero(negative.to_numpy())[0])
        raise DataError(
            f"{path}: negative reading for meter {df['meter_id'].iloc[i]} "
            f"at {df['timestamp_iso8601'].iloc[i]}"
        )

    doy = ts.dt.dayofyear.to_numpy()
    if _is_leap(year):
        feb29 = (ts.dt.month == 2) & (ts.dt.day == 29)
        df = df[~feb29.to_numpy()]
        doy = doy[~feb29.to_numpy()]
        doy = np.where(doy > 59, doy - 1, doy)  # re-index days after Feb 29
        ts = ts[~feb29]
    hour_idx = (doy - 1) * HOURS_PER_DAY + ts.dt.hour.to_numpy()

    epoch = datetime(year, 1, 1)
    out: dict[str, HourlyTimeSeries] = {}
    meters = df["meter_id"].to_numpy()
    kw = df["kw"].to_numpy(dtype=float)
    order = np.argsort(meters, kind="stable")
    meters, kw, hour_idx = meters[order], kw[order], hour_idx[order]
    bounds = np.flatnonzero(np.r_[True, meters[1:] != meters[:-1], True])
    for s, e in zip(bounds[:-1], bounds[1:]):
        mid = meters[s]
        idx = hour_idx[s:e]
        if len(np.unique(idx)) != len(idx):
            raise DataError(f"{path}: duplicate timestamps for meter {mid}")
        vals = np.full(HOURS_PER_YEAR, np.nan)
        vals[idx] = kw[s:e]
        missing = np.flatnonzero(np.isnan(vals))
        if len(missing) > MAX_MISSING_FRACTION * HOURS_PER_YEAR:
            raise DataError(
                f"{path}: meter {mid} is missing {len(missing)} hours (> 5% of the year)"
            )
        _fill_gaps(vals, missing, mid)
        out[mid] = HourlyTimeSeries(epoch, vals)
    return out


def _fill_gaps(vals: np.ndarray, missing: np.ndarray, mid: str) -> None:
    for i in missing:  # ascending, so earlier fills cascade forward
        j = i - HOURS_PER_DAY
        while j >= 0 and np.isnan(vals[j]):
            j -= HOURS_PER_DAY
        if j < 0:
            j = i + HOURS_PER_DAY
            while j < len(vals) and np.isnan(vals[j]):
                j += HOURS_PER_DAY
            if j >= len(vals):
                raise DataError(f"meter {mid}: no reference day to fill hour {i}")
        vals[i] = vals[j]


def parse_temperature(path) -> list[DailyTemperatureRecord]:
    """Read daily min/max temperature records; Feb 29 is dropped."""
    df = pd.read_csv(path)
    _require_columns(df, ["date", "tmin_c", "tmax_c"], path)
    records = []
    prev: Optional[date] = None
    for row in df.itertuples(index=False):
        day = date.fromisoformat(str(row.date))
        if prev is not None and day != prev + timedelta(days=1):
            skipped_leap_day = (
                day == prev + timedelta(days=2)
                and prev.month == 2
                and prev.day == 28
                and _is_leap(prev.year)
            )
            if not skipped_leap_day:
                raise DataError(f"{path}: dates not contiguous around {day}")
        prev = day
        if day.month == 2 and day.day == 29:
            continue
        records.append(DailyTemperatureRecord(day, float(row.tmin_c), float(row.tmax_c)))
    if not records:
        raise DataError(f"{path}: no temperature records")
    return records


def diurnal_anchors(records: list[DailyTemperatureRecord]) -> tuple[np.ndarray, np.ndarray]:
    """Anchor hours/values for the piecewise-cosine diurnal profile.

    A virtual previous-day maximum and next-day minimum pad the sequence so
    the first and last partial days stay within the neighbors' min/max range.
    """
    hours = [MAX_ANCHOR_HOUR - HOURS_PER_DAY]
    values = [records[0].t_max_c]
    for d, rec in enumerate(records):
        hours.append(d * HOURS_PER_DAY + MIN_ANCHOR_HOUR)
        values.append(rec.t_min_c)
        hours.append(d * HOURS_PER_DAY + MAX_ANCHOR_HOUR)
        values.append(rec.t_max_c)
    hours.append(len(records) * HOURS_PER_DAY + MIN_ANCHOR_HOUR)
    values.append(records[-1].t_min_c)
    return np.array(hours), np.array(values)


def diurnal_temperature_c(records: list[DailyTemperatureRecord], hours: np.ndarray) -> np.ndarray:
    """Evaluate the cosine-interpolated temperature (deg C) at given hours."""
    anchor_h, anchor_v = diurnal_anchors(records)
    hours = np.asarray(hours, dtype=float)
    seg = np.clip(np.searchsorted(anchor_h, hours, side="right") - 1, 0, len(anchor_h) - 2)
    h0, h1 = anchor_h[seg], anchor_h[seg + 1]
    v0, v1 = anchor_v[seg], anchor_v[seg + 1]
    s = (hours - h0) / (h1 - h0)
    return v0 + (v1 - v0) * (1 - np.cos(np.pi * s)) / 2


def interpolate_hourly_temperature(records: list[DailyTemperatureRecord]) -> HourlyTimeSeries:
    """Hourly ambient temperature in kelvin from daily min/max records."""
    hours = np.arange(len(records) * HOURS_PER_DAY, dtype=float)
    celsius = diurnal_temperature_c(records, hours)
    epoch = datetime(records[0].day.year, records[0].day.month, records[0].day.day)
    return HourlyTimeSeries(epoch, celsius + KELVIN_OFFSET)


def check_eligibility(meter: Meter, config: ScenarioConfig) -> tuple[bool, bool]:
    """Whether a meter may adopt an HP / EV: occupied enough and device-free."""
    base = meter.baseload.values
    winter_mean = float(base[WINTER_HOURS[: len(base)]].mean())
    annual_mean = float(base.mean())
    hp_ok = (not meter.has_hp) and winter_mean >= config.hp_winter_threshold_kw
    ev_ok = (not meter.has_ev) and annual_mean >= config.ev_mean_threshold_kw
    return hp_ok, ev_ok


def load_feeder(input_dir, config: ScenarioConfig) -> FeederData:
    """Read and cross-validate the five feeder input files."""
    transformers, meter_map = parse_topology(
        os.path.join(input_dir, TRANSFORMERS_FILE),
        os.path.join(input_dir, METER_MAP_FILE),
    )
    loads = parse_ami(os.path.join(input_dir, AMI_FILE), config.base_year)
    devices_path = os.path.join(input_dir, DEVICES_FILE)
    devices = parse_devices(devices_path) if os.path.exists(devices_path) else {}
    records = parse_temperature(os.path.join(input_dir, TEMPERATURE_FILE))
    if len(records) != DAYS_PER_YEAR:
        raise DataError(f"expected {DAYS_PER_YEAR} daily temperature records, got {len(records)}")
    ambient = interpolate_hourly_temperature(records)

    missing = sorted(set(meter_map) - set(loads))
    if missing:
        raise DataError(f"no AMI data for meters: {', '.join(missing[:5])}")
    unknown = sorted(set(loads) - set(meter_map))
    if unknown:
        raise TopologyError(f"AMI data for unmapped meters: {', '.join(unknown[:5])}")

    base_year = loads[next(iter(loads))].epoch.year
    meters = {}
    for mid, tid in meter_map.items():
        meter = Meter(id=mid, transformer_id=tid, baseload=loads[mid])
        hp_ok, ev_ok = check_eligibility(meter, config)
        has_hp, has_ev = devices.get(mid, (False, False))
        # pre-existing installations are flagged in initial_devices; their
        # device parameters are sampled per realization by the engine
        meters[mid] = Meter(
            id=mid,
            transformer_id=tid,
            baseload=loads[mid],
            hp_eligible=hp_ok and not has_hp,
            ev_eligible=ev_ok and not has_ev,
        )
    initial = {mid: devices.get(mid, (False, False)) for mid in meter_map}
    return FeederData(
        transformers=transformers,
        meters=meters,
        ambient=ambient,
        base_year=base_year,
        initial_devices=initial,
    )


def write_topology(transformers: Mapping[str, Transformer], transformers_path, meters_path) -> None:
    with open(transformers_path, "w", encoding="utf-8", newline="\n") as f:
        f.write("transformer_id,rating_kva,initial_age_years\n")
        for tid in sorted(transformers):
            tr = transformers[tid]
            f.write(f"{tid},{tr.rating_kva:g},{tr.initial_age:g}\n")
    with open(meters_path, "w", encoding="utf-8", newline="\n") as f:
        f.write("meter_id,transformer_id\n")
        for tid in sorted(transformers):
            for mid in sorted(transformers[tid].meters):
                f.write(f"{mid},{tid}\n")


def write_ami(loads: Mapping[str, HourlyTimeSeries], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("meter_id,timestamp_iso8601,kw\n")
        for mid in sorted(loads):
            series = loads[mid]
            stamps = _year_hour_stamps(series.epoch.year)
            for stamp, kw in zip(stamps, series.values):
                f.write(f"{mid},{stamp},{kw:.4f}\n")


def write_devices(devices: Mapping[str, tuple[bool, bool]], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("meter_id,has_hp,has_ev\n")
        for mid in sorted(devices):
            hp, ev = devices[mid]
            f.write(f"{mid},{str(hp).lower()},{str(ev).lower()}\n")


def write_temperature(records: list[DailyTemperatureRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("date,tmin_c,tmax_c\n")
        for rec in records:
            f.write(f"{rec.day.isoformat()},{rec.t_min_c:.2f},{rec.t_max_c:.2f}\n")


def _year_hour_stamps(year: int) -> list[str]:
    stamps = []
    day = date(year, 1, 1)
    while day.year == year:
        if not (day.month == 2 and day.day == 29):
            base = day.isoformat()
            stamps.extend(f"{base}T{h:02d}:00:00" for h in range(HOURS_PER_DAY))
        day += timedelta(days=1)
    return stamps


def _require_columns(df: pd.DataFrame, cols: list[str], path) -> None:
    missing = [c for c in cols if c not in df.columns]
    if missing:
        raise DataError(f"{path}: missing columns {missing}")


def _parse_bool(raw: str, path) -> bool:
    val = str(raw).strip().lower()
    if val in ("true", "1", "yes"):
        return True
    if val in ("false", "0", "no"):
        return False
    raise DataError(f"{path}: invalid boolean value {raw!r}")


def _is_leap(year: int) -> bool:
    return year % 4 == 0 and (year % 100 != 0 or year % 400 == 0)
