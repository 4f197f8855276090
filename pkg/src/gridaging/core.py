"""Shared domain types and load arithmetic for the feeder aging simulator."""
from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from typing import Mapping, Optional, Sequence

import numpy as np

HOURS_PER_DAY = 24
DAYS_PER_YEAR = 365
HOURS_PER_YEAR = DAYS_PER_YEAR * HOURS_PER_DAY  # canonical 365-day year
KELVIN_OFFSET = 273.15


class DataError(Exception):
    """Input data failed validation."""


class StructuralError(DataError):
    """Series shapes or epochs do not line up."""


class TopologyError(DataError):
    """Feeder topology is inconsistent (unknown ids, duplicates)."""


class ConfigError(DataError):
    """Scenario or solver configuration is invalid."""


@dataclass(frozen=True)
class HourlyTimeSeries:
    """Fixed-step hourly series (kW for loads, kelvin for temperature).

    Length must be a positive multiple of 24; the step is always one hour.
    """

    epoch: datetime
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or len(vals) == 0 or len(vals) % HOURS_PER_DAY != 0:
            raise StructuralError(
                f"series length must be a positive multiple of 24, got {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise StructuralError("series contains non-finite values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def aligned_with(self, other: "HourlyTimeSeries") -> bool:
        return self.epoch == other.epoch and len(self) == len(other)


@dataclass(frozen=True)
class Meter:
    """A customer service point hanging off one transformer."""

    id: str
    transformer_id: str
    baseload: HourlyTimeSeries
    has_hp: bool = False
    has_ev: bool = False
    hp_eligible: bool = False
    ev_eligible: bool = False
    hp_params: Optional[object] = None
    ev_params: Optional[object] = None

    def __post_init__(self):
        if self.has_hp and self.hp_params is None:
            raise DataError(f"meter {self.id}: has_hp set without HP parameters")
        if self.has_ev and self.ev_params is None:
            raise DataError(f"meter {self.id}: has_ev set without EV parameters")


@dataclass(frozen=True)
class Transformer:
    id: str
    rating_kva: float
    meters: frozenset[str] = field(default_factory=frozenset)
    initial_age: float = 0.0
    capacity_scale: float = 1.0

    def __post_init__(self):
        if self.rating_kva <= 0:
            raise ConfigError(f"transformer {self.id}: rating must be > 0")
        if self.initial_age < 0:
            raise DataError(f"transformer {self.id}: initial age must be >= 0")
        if self.capacity_scale <= 0:
            raise ConfigError(f"transformer {self.id}: capacity scale must be > 0")


@dataclass(frozen=True)
class ScenarioConfig:
    """Knobs for one simulation study.

    Costs are in thousands of currency units.  ``t50_*`` are the calendar
    years at which the adoption curves cross 50%.  ``a_hp``/``a_ev``
    override the fitted logistic timescales; when None they are fitted
    from the observed device fractions (falling back to ``f0_fallback``
    when no devices are present in the records).
    """

    t50_hp: float = 2040.0
    t50_ev: float = 2045.0
    base_year: Optional[int] = None
    horizon_years: int = 20
    realizations: int = 100
    master_seed: int = 0
    f_max: float = 1.0
    hp_winter_threshold_kw: float = 0.2
    ev_mean_threshold_kw: float = 0.2
    capacity_scale: float = 1.0
    cost_upgrade: float = 5.0
    cost_failure: float = 50.0
    return_rate: float = 0.02
    n_max: int = 10
    a_hp: Optional[float] = None
    a_ev: Optional[float] = None
    f0_fallback: float = 0.05
    hp_cop: float = 2.0

    def __post_init__(self):
        if self.horizon_years < 1:
            raise ConfigError("horizon_years must be >= 1")
        if not (0 < self.f_max <= 1):
            raise ConfigError("f_max must be in (0, 1]")
        if self.cost_failure <= self.cost_upgrade:
            raise ConfigError("cost_failure must exceed cost_upgrade")
        if not (0 <= self.return_rate < 1):
            raise ConfigError("return_rate must be in [0, 1)")
        if self.realizations < 1:
            raise ConfigError("realizations must be >= 1")
        if self.capacity_scale <= 0:
            raise ConfigError("capacity_scale must be > 0")
        if self.hp_cop <= 0:
            raise ConfigError("hp_cop must be > 0")


@dataclass(frozen=True)
class FailureCurveSet:
    """Per-transformer cumulative failure probability by simulation year.

    ``curves[i, t-1]`` is the probability transformer ``transformer_ids[i]``
    has failed by the end of year ``t``, averaged over realizations.
    """

    transformer_ids: tuple[str, ...]
    curves: np.ndarray  # shape (n_transformers, horizon_years)

    def __post_init__(self):
        ids = tuple(self.transformer_ids)
        curves = np.asarray(self.curves, dtype=float)
        if curves.ndim != 2 or curves.shape[0] != len(ids):
            raise StructuralError("curve matrix shape does not match transformer ids")
        if len(set(ids)) != len(ids):
            raise TopologyError("duplicate transformer ids in curve set")
        if np.any(curves < -1e-12) or np.any(curves > 1 + 1e-12):
            raise DataError("failure probabilities must lie in [0, 1]")
        if curves.shape[1] > 1 and np.any(np.diff(curves, axis=1) < -1e-9):
            raise DataError("failure curves must be nondecreasing in time")
        curves.setflags(write=False)
        object.__setattr__(self, "transformer_ids", ids)
        object.__setattr__(self, "curves", curves)

    @property
    def horizon(self) -> int:
        return self.curves.shape[1]

    def curve(self, transformer_id: str) -> np.ndarray:
        return self.curves[self.transformer_ids.index(transformer_id)]

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("transformer_id,year,mean_F\n")
            for i, tid in enumerate(self.transformer_ids):
                for t in range(self.horizon):
                    f.write(f"{tid},{t + 1},{self.curves[i, t]:.12g}\n")

    @classmethod
    def from_csv(cls, path) -> "FailureCurveSet":
        rows: dict[str, dict[int, float]] = {}
        with open(path, encoding="utf-8") as f:
            header = f.readline().strip().split(",")
            if header != ["transformer_id", "year", "mean_F"]:
                raise DataError(f"{path}: unexpected failure-curve header {header}")
            for line in f:
                line = line.strip()
                if not line:
                    continue
                tid, year, value = line.split(",")
                rows.setdefault(tid, {})[int(year)] = float(value)
        if not rows:
            raise DataError(f"{path}: no failure curves found")
        horizons = {max(by_year) for by_year in rows.values()}
        if len(horizons) != 1:
            raise StructuralError(f"{path}: inconsistent horizons across transformers")
        horizon = horizons.pop()
        ids = tuple(sorted(rows))
        curves = np.empty((len(ids), horizon))
        for i, tid in enumerate(ids):
            by_year = rows[tid]
            if sorted(by_year) != list(range(1, horizon + 1)):
                raise StructuralError(f"{path}: missing years for transformer {tid}")
            curves[i] = [by_year[t] for t in range(1, horizon + 1)]
        return cls(ids, curves)


def aggregate_transformer_load(
    transformer: Transformer,
    meter_loads: Mapping[str, HourlyTimeSeries],
    template: Optional[HourlyTimeSeries] = None,
) -> HourlyTimeSeries:
    """Sum of the total loads of the transformer's downstream meters."""
    series = []
    for mid in sorted(transformer.meters):
        if mid not in meter_loads:
            raise TopologyError(
                f"transformer {transformer.id}: no load series for meter {mid}"
            )
        series.append(meter_loads[mid])
    if not series:
        if template is None:
            raise StructuralError(
                f"transformer {transformer.id}: empty meter set needs a template series"
            )
        return HourlyTimeSeries(template.epoch, np.zeros(len(template)))
    first = series[0]
    for s in series[1:]:
        if not s.aligned_with(first):
            raise StructuralError(
                f"transformer {transformer.id}: meter series epochs/lengths differ"
            )
    total = np.zeros(len(first))
    for s in series:
        total += s.values
    return HourlyTimeSeries(first.epoch, total)


def per_unit_load(
    load: HourlyTimeSeries, transformer: Transformer, extra_scale: float = 1.0
) -> HourlyTimeSeries:
    """Load as a fraction of (scaled) rated capacity, unity power factor."""
    denom = transformer.rating_kva * transformer.capacity_scale * extra_scale
    if denom <= 0:
        raise ConfigError(f"transformer {transformer.id}: non-positive effective rating")
    return HourlyTimeSeries(load.epoch, load.values / denom)


def sum_meter_series(series: Sequence[np.ndarray], n_hours: int) -> np.ndarray:
    """Plain-array summation used by the simulation hot path."""
    total = np.zeros(n_hours)
    for v in series:
        if len(v) != n_hours:
            raise StructuralError("meter series lengths differ")
        total += v
    return total
