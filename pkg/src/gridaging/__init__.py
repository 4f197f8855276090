"""Feeder-scale transformer failure-risk simulation and upgrade scheduling."""

from .adoption import GrowthCurve, fit_timescale, logistic_fraction
from .core import (
    ConfigError,
    DataError,
    FailureCurveSet,
    HourlyTimeSeries,
    Meter,
    ScenarioConfig,
    StructuralError,
    TopologyError,
    Transformer,
)
from .montecarlo import aggregate_curves, convergence_diagnostic, run_realization, run_simulation
from .scheduler import CostModel, Schedule, expected_failures, solve_schedule
from .synth import FeederSpec, generate_feeder
from .thermal import aging_rate, failure_probability, simulate_transformer_year

__version__ = "0.1.0"
