"""Logistic electrification growth and yearly stochastic device adoption."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Union

import numpy as np

from .core import ConfigError, Meter

HP = "hp"
EV = "ev"


@dataclass(frozen=True)
class GrowthCurve:
    """S-curve adoption: f(t) = f_max / (1 + exp(-(t - t50) / a))."""

    f_max: float
    t50: float
    a: float

    def __post_init__(self):
        if self.a <= 0:
            raise ConfigError("growth timescale a must be > 0")
        if not (0 < self.f_max <= 1):
            raise ConfigError("f_max must be in (0, 1]")


def logistic_fraction(curve: GrowthCurve, t: float) -> float:
    return curve.f_max / (1.0 + math.exp(-(t - curve.t50) / curve.a))


def fit_timescale(f0: float, t0: float, t50: float, f_max: float = 1.0) -> float:
    """Timescale a such that the curve passes through (t0, f0) exactly."""
    if not (0 < f0 < f_max):
        raise ConfigError(f"current adoption f0={f0} must lie strictly inside (0, f_max)")
    ratio = f_max / f0 - 1.0
    if math.isclose(ratio, 1.0, rel_tol=1e-12):
        if math.isclose(t0, t50, abs_tol=1e-9):
            raise ConfigError(
                "f0 = f_max/2 at t50: any timescale fits, specify it explicitly"
            )
        raise ConfigError("inconsistent inputs: f0 = f_max/2 but t0 != t50")
    a = (t50 - t0) / math.log(ratio)
    if a <= 0:
        raise ConfigError(
            f"inconsistent inputs: f0={f0} at t0={t0} with t50={t50} implies a <= 0"
        )
    return a


def annual_adoption_probability(
    curve: GrowthCurve, t: float, eligible_count: int, total_meters: int
) -> float:
    """Per-meter adoption probability for the year starting at t.

    The yearly growth increment f(t+1) - f(t) is spread over the meters
    still able to adopt, so expected adoptions track the aggregate curve.
    """
    if total_meters <= 0:
        raise ConfigError("total_meters must be > 0")
    if eligible_count <= 0:
        return 0.0
    df = logistic_fraction(curve, t + 1) - logistic_fraction(curve, t)
    return min(1.0, max(0.0, df * total_meters / eligible_count))


RngFactory = Union[np.random.Generator, Callable[[str], np.random.Generator]]


def draw_adoptions(
    meters: Mapping[str, Meter],
    year: float,
    curve_hp: GrowthCurve,
    curve_ev: GrowthCurve,
    total_meters: int,
    rng: RngFactory,
) -> list[tuple[str, str]]:
    """Independent Bernoulli adoption draws for every still-eligible meter.

    ``rng`` is either a single generator (shared, meters visited in sorted
    id order) or a callable mapping meter id to its own stream.
    """
    rng_for = rng if callable(rng) else (lambda _mid: rng)
    hp_pool = [mid for mid, m in meters.items() if m.hp_eligible and not m.has_hp]
    ev_pool = [mid for mid, m in meters.items() if m.ev_eligible and not m.has_ev]
    p_hp = annual_adoption_probability(curve_hp, year, len(hp_pool), total_meters)
    p_ev = annual_adoption_probability(curve_ev, year, len(ev_pool), total_meters)

    adopted = []
    hp_set, ev_set = set(hp_pool), set(ev_pool)
    for mid in sorted(hp_set | ev_set):
        stream = rng_for(mid)
        if mid in hp_set and stream.random() < p_hp:
            adopted.append((mid, HP))
        if mid in ev_set and stream.random() < p_ev:
            adopted.append((mid, EV))
    return adopted
