"""Upgrade-schedule optimization from mean failure curves.

The one-upgrade-per-transformer and per-year-capacity constraints form a
transportation structure, so the binary program is solved exactly as a
rectangular min-cost assignment: each year contributes up to n_max slots,
and every transformer also gets a zero-cost opt-out slot (never upgraded).
An exhaustive enumerator over tiny instances serves as the oracle.

Note on capacity semantics: the yearly limit is implemented as
sum_x U[x,t] <= n_max, with n_max meaning the number of upgrades allowed
per year.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import ConfigError, DataError, FailureCurveSet

CostLike = Union[float, Mapping[str, float]]


@dataclass(frozen=True)
class CostModel:
    """Per-transformer upgrade/failure costs (thousands) and discounting."""

    upgrade_cost: CostLike = 5.0
    failure_cost: CostLike = 50.0
    return_rate: float = 0.02

    def __post_init__(self):
        if not (0 <= self.return_rate < 1):
            raise ConfigError("return_rate must be in [0, 1)")

    def cost_vectors(self, ids: tuple[str, ...]) -> tuple[np.ndarray, np.ndarray]:
        cu = _as_vector(self.upgrade_cost, ids, "upgrade_cost")
        cf = _as_vector(self.failure_cost, ids, "failure_cost")
        if np.any(cf <= cu):
            raise ConfigError("failure cost must exceed upgrade cost for every transformer")
        return cu, cf


@dataclass(frozen=True)
class Schedule:
    """Upgrade year per transformer (1-based); absent means never upgraded."""

    upgrades: dict[str, int] = field(default_factory=dict)
    n_max: int = 0

    def upgrades_in_year(self, year: int) -> int:
        return sum(1 for y in self.upgrades.values() if y == year)


def effective_costs(
    model: CostModel, curves: FailureCurveSet
) -> tuple[np.ndarray, np.ndarray]:
    """Deferral-adjusted upgrade cost and cumulative expected failure cost.

    Returns (cu[x, t], cf_cum[x, t]) for t = 1..horizon (column t-1).
    """
    horizon = curves.horizon
    cu0, cf0 = model.cost_vectors(curves.transformer_ids)
    factor = 2.0 - (1.0 + model.return_rate) ** np.arange(horizon)  # (1+r)^(t-1)
    df = np.diff(curves.curves, axis=1, prepend=0.0)
    if np.any(df < -1e-9):
        raise DataError("failure curves must be nondecreasing to build costs")
    cu = cu0[:, None] * factor[None, :]
    cf_cum = np.cumsum(cf0[:, None] * np.clip(df, 0.0, None) * factor[None, :], axis=1)
    return cu, cf_cum


def schedule_weights(model: CostModel, curves: FailureCurveSet) -> tuple[np.ndarray, float]:
    """Per-(transformer, year) objective coefficient plus the fixed offset.

    Total cost of a schedule = sum of w over scheduled cells + constant,
    where the constant is the expected failure cost with no upgrades at all.
    """
    cu, cf_cum = effective_costs(model, curves)
    w = cu + cf_cum - curves.curves * cu - cf_cum[:, -1:]
    return w, float(cf_cum[:, -1].sum())


def candidate_indices(curves: FailureCurveSet) -> np.ndarray:
    """Transformers worth considering: nonzero failure risk by the horizon."""
    return np.flatnonzero(curves.curves[:, -1] > 0)


def solve_schedule(
    model: CostModel, curves: FailureCurveSet, n_max: int
) -> tuple[Schedule, float]:
    """Provably optimal upgrade schedule under the yearly capacity limit."""
    if n_max <= 0:
        raise ConfigError("n_max must be >= 1")
    w, constant = schedule_weights(model, curves)
    cand = candidate_indices(curves)
    horizon = curves.horizon
    if len(cand) == 0:
        return Schedule({}, n_max), constant

    n = len(cand)
    cap = min(n_max, n)
    # columns: cap slots per year, then one opt-out slot per transformer
    cost = np.full((n, horizon * cap + n), np.inf)
    wc = w[cand]
    cost[:, : horizon * cap] = np.repeat(wc, cap, axis=1)
    cost[np.arange(n), horizon * cap + np.arange(n)] = 0.0
    rows, cols = linear_sum_assignment(cost)

    ids = curves.transformer_ids
    upgrades: dict[str, int] = {}
    used = np.zeros(horizon + 1, dtype=int)
    for r, c in zip(rows, cols):
        if c < horizon * cap:
            year = c // cap + 1
            upgrades[ids[cand[r]]] = year
            used[year] += 1

    # deterministic tie-break: pull each upgrade to the earliest equal-cost year
    for r in range(n):
        tid = ids[cand[r]]
        if tid not in upgrades:
            continue
        year = upgrades[tid]
        for earlier in range(1, year):
            if used[earlier] < cap and wc[r, earlier - 1] == wc[r, year - 1]:
                used[year] -= 1
                used[earlier] += 1
                upgrades[tid] = earlier
                break

    schedule = Schedule(upgrades, n_max)
    return schedule, schedule_objective(model, curves, schedule)


def brute_force_schedule(
    model: CostModel, curves: FailureCurveSet, n_max: int, max_cells: int = 16
) -> tuple[Schedule, float]:
    """Exhaustive oracle over all feasible assignments; tiny instances only."""
    if n_max <= 0:
        raise ConfigError("n_max must be >= 1")
    w, constant = schedule_weights(model, curves)
    cand = candidate_indices(curves)
    horizon = curves.horizon
    if len(cand) * horizon > max_cells:
        raise ValueError(
            f"instance too large for enumeration: {len(cand)} x {horizon} cells"
        )
    ids = curves.transformer_ids
    best_obj = np.inf
    best: dict[str, int] = {}
    for choice in itertools.product(range(horizon + 1), repeat=len(cand)):
        counts = np.bincount(choice, minlength=horizon + 1)
        if np.any(counts[1:] > n_max):
            continue
        obj = sum(w[x, year - 1] for x, year in zip(cand, choice) if year > 0)
        if obj < best_obj:
            best_obj = obj
            best = {ids[x]: year for x, year in zip(cand, choice) if year > 0}
    schedule = Schedule(best, n_max)
    return schedule, schedule_objective(model, curves, schedule)


def schedule_objective(
    model: CostModel, curves: FailureCurveSet, schedule: Schedule
) -> float:
    """Recompute the objective of a given schedule from scratch."""
    w, constant = schedule_weights(model, curves)
    ids = curves.transformer_ids
    total = constant
    for tid in sorted(schedule.upgrades):  # fixed order keeps the sum reproducible
        year = schedule.upgrades[tid]
        if tid not in ids:
            raise DataError(f"schedule references unknown transformer {tid}")
        if not (1 <= year <= curves.horizon):
            raise DataError(f"schedule year {year} outside horizon for {tid}")
        total += w[ids.index(tid), year - 1]
    return float(total)


def validate_schedule(schedule: Schedule, curves: FailureCurveSet) -> None:
    counts = np.zeros(curves.horizon + 1, dtype=int)
    for tid, year in schedule.upgrades.items():
        if tid not in curves.transformer_ids:
            raise DataError(f"schedule references unknown transformer {tid}")
        if not (1 <= year <= curves.horizon):
            raise DataError(f"upgrade year {year} outside horizon for {tid}")
        counts[year] += 1
    if schedule.n_max > 0 and np.any(counts[1:] > schedule.n_max):
        raise DataError("schedule exceeds the per-year upgrade capacity")


def expected_failures(curves: FailureCurveSet, schedule: Schedule) -> np.ndarray:
    """Expected failure count per year; an upgrade stops failures from its year on."""
    validate_schedule(schedule, curves)
    df = np.diff(curves.curves, axis=1, prepend=0.0)
    active = np.ones_like(df)
    ids = curves.transformer_ids
    for tid, year in schedule.upgrades.items():
        active[ids.index(tid), year - 1 :] = 0.0
    return (df * active).sum(axis=0)


def write_schedule(schedule: Schedule, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("transformer_id,upgrade_year\n")
        for tid in sorted(schedule.upgrades):
            f.write(f"{tid},{schedule.upgrades[tid]}\n")


def read_schedule(path, n_max: int = 0) -> Schedule:
    upgrades = {}
    with open(path, encoding="utf-8") as f:
        header = f.readline().strip().split(",")
        if header != ["transformer_id", "upgrade_year"]:
            raise DataError(f"{path}: unexpected schedule header {header}")
        for line in f:
            line = line.strip()
            if not line:
                continue
            tid, year = line.split(",")
            upgrades[tid] = int(year)
    return Schedule(upgrades, n_max)


def write_expected_failures(
    curves: FailureCurveSet, schedule: Schedule, path
) -> None:
    expected = expected_failures(curves, schedule)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("year,expected_count,planned_upgrades\n")
        for t in range(curves.horizon):
            f.write(f"{t + 1},{expected[t]:.12g},{schedule.upgrades_in_year(t + 1)}\n")


def _as_vector(value: CostLike, ids: tuple[str, ...], name: str) -> np.ndarray:
    if isinstance(value, Mapping):
        missing = [tid for tid in ids if tid not in value]
        if missing:
            raise ConfigError(f"{name} missing entries for {missing[:5]}")
        vec = np.array([float(value[tid]) for tid in ids])
    else:
        vec = np.full(len(ids), float(value))
    if np.any(vec <= 0):
        raise ConfigError(f"{name} must be positive")
    return vec
