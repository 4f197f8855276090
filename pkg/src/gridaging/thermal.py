"""Hot-spot temperature dynamics, insulation aging, and age-to-failure mapping.

The hot-spot ODE dT/dt = a_bar*L^2 - b*(T - T_ambient) + c is integrated
with its exact solution over each hour (load and ambient held constant
within the step), which is stable for any step size; an explicit Euler
step at 1 h would not be, since b*dt = 2.94.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .core import HOURS_PER_YEAR, DataError, StructuralError


@dataclass(frozen=True)
class ThermalParams:
    """Coefficients of the hot-spot ODE, fitted to a small pole transformer.

    a_raw is the original per-kVA^2 fit for a 25 kVA unit; a_bar is the
    rescaled coefficient used with per-unit load.
    """

    a_bar: float = 0.587  # K/min per (p.u. load)^2
    b: float = 0.049  # 1/min
    c: float = 0.178  # K/min
    a_raw: float = 9.39e-4  # K/min/kVA^2, 25 kVA fit
    dt_min: float = 60.0

    def __post_init__(self):
        if self.b <= 0 or self.dt_min <= 0:
            raise DataError("thermal parameters require b > 0 and dt > 0")


@dataclass(frozen=True)
class AgingParams:
    c_kelvin: float = 15000.0
    t_nominal_k: float = 383.0

    def __post_init__(self):
        if self.c_kelvin <= 0 or self.t_nominal_k <= 0:
            raise DataError("aging parameters must be positive")


@dataclass(frozen=True)
class FailureParams:
    eta_years: float = 112.0
    beta: float = 3.5

    def __post_init__(self):
        if self.eta_years <= 0 or self.beta <= 0:
            raise DataError("failure parameters must be positive")


DEFAULT_THERMAL = ThermalParams()
DEFAULT_AGING = AgingParams()
DEFAULT_FAILURE = FailureParams()


def steady_state_temperature(
    load_pu: float, t_ambient_k: float, params: ThermalParams = DEFAULT_THERMAL
) -> float:
    """Fixed point of the hot-spot ODE for constant load and ambient."""
    return t_ambient_k + (params.a_bar * load_pu**2 + params.c) / params.b


def step_temperature(
    t_now_k: float,
    load_pu: float,
    t_ambient_k: float,
    params: ThermalParams = DEFAULT_THERMAL,
) -> float:
    """Exact one-step update under piecewise-constant load and ambient."""
    t_ss = steady_state_temperature(load_pu, t_ambient_k, params)
    return t_ss + (t_now_k - t_ss) * math.exp(-params.b * params.dt_min)


def temperature_trace(
    load_pu: np.ndarray,
    ambient_k: np.ndarray,
    t_start_k: float,
    params: ThermalParams = DEFAULT_THERMAL,
) -> np.ndarray:
    """End-of-hour hot-spot temperatures for aligned hourly load/ambient arrays."""
    if len(load_pu) != len(ambient_k):
        raise StructuralError("load and ambient series lengths differ")
    t_ss = ambient_k + (params.a_bar * np.square(load_pu) + params.c) / params.b
    decay = math.exp(-params.b * params.dt_min)
    # T[n] = decay*T[n-1] + (1-decay)*T_ss[n]: a first-order IIR filter
    trace, _ = lfilter([1.0 - decay], [1.0, -decay], t_ss, zi=[decay * t_start_k])
    return trace


def aging_rate(t_kelvin, params: AgingParams = DEFAULT_AGING):
    """Arrhenius-type relative aging rate; 1.0 at the nominal temperature."""
    return np.exp(-params.c_kelvin * (1.0 / np.asarray(t_kelvin) - 1.0 / params.t_nominal_k))


def simulate_transformer_year(
    load_pu: np.ndarray,
    ambient_k: np.ndarray,
    t_start_k: float,
    age_start_years: float,
    thermal: ThermalParams = DEFAULT_THERMAL,
    aging: AgingParams = DEFAULT_AGING,
    return_trace: bool = False,
):
    """Advance thermal state and accumulated age through one load series.

    Aging uses the end-of-hour temperature for each one-hour step; a year
    is 8760 hours.  Returns (t_end, age_end) or (t_end, age_end, trace).
    """
    trace = temperature_trace(load_pu, ambient_k, t_start_k, thermal)
    age_end = age_start_years + float(np.sum(aging_rate(trace, aging))) / HOURS_PER_YEAR
    if return_trace:
        return trace[-1], age_end, trace
    return float(trace[-1]), age_end


def failure_probability(age_years, params: FailureParams = DEFAULT_FAILURE):
    """Weibull cumulative failure probability at a given effective age."""
    age = np.asarray(age_years, dtype=float)
    if np.any(age < 0):
        raise DataError("effective age must be >= 0")
    result = 1.0 - np.exp(-np.power(age / params.eta_years, params.beta))
    return float(result) if np.isscalar(age_years) else result
