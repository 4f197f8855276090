"""Realization orchestration, seeded RNG streams, and curve aggregation.

Every random draw flows from the master seed through a documented splitting
function, so results are bit-identical for any worker count: the stream for
a given (realization, meter, year, purpose) never depends on scheduling or
iteration order.
"""
from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import adoption as adopt_mod
from . import profiles, thermal
from .core import (
    HOURS_PER_YEAR,
    KELVIN_OFFSET,
    DataError,
    FailureCurveSet,
    Meter,
    ScenarioConfig,
    StructuralError,
)
from .ingestion import FeederData


@dataclass(frozen=True)
class RealizationResult:
    index: int
    failure: np.ndarray  # (n_transformers, horizon) cumulative probabilities
    adoptions_hp: tuple[int, ...]  # new installs per year
    adoptions_ev: tuple[int, ...]
    age_gain: np.ndarray  # effective years gained per transformer over the horizon


def hash64(*parts) -> int:
    """Stable 64-bit seed derived from heterogeneous parts."""
    h = hashlib.blake2b(digest_size=8)
    for p in parts:
        h.update(repr(p).encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little")


def substream(*parts) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(hash64(*parts)))


def run_realization(
    index: int,
    config: ScenarioConfig,
    feeder: FeederData,
    curve_hp: adopt_mod.GrowthCurve,
    curve_ev: adopt_mod.GrowthCurve,
) -> RealizationResult:
    """One stochastic 20-year (by default) trajectory of the whole feeder."""
    child = hash64(config.master_seed, index)
    ambient = feeder.ambient.values
    if len(ambient) != HOURS_PER_YEAR:
        raise StructuralError("ambient series must cover one 8760-hour year")
    temp_c = ambient - KELVIN_OFFSET
    t_ids = sorted(feeder.transformers)
    t_index = {tid: i for i, tid in enumerate(t_ids)}
    horizon = config.horizon_years
    total = len(feeder.meters)

    meters: dict[str, Meter] = {}
    hp_loads: dict[str, np.ndarray] = {}
    for mid in sorted(feeder.meters):
        m = feeder.meters[mid]
        has_hp, has_ev = feeder.initial_devices.get(mid, (False, False))
        hp_params = ev_params = None
        if has_hp:
            hp_params = profiles.sample_hp_device(
                substream(child, "hp-device", mid, 0), cop=config.hp_cop
            )
            hp_loads[mid] = profiles.hp_profile(hp_params, temp_c)
        if has_ev:
            ev_params = profiles.sample_ev_device(substream(child, "ev-device", mid, 0))
        meters[mid] = replace(m, has_hp=has_hp, has_ev=has_ev,
                              hp_params=hp_params, ev_params=ev_params)

    # baseload sums never change; compute them once per transformer
    base_tr = {}
    for tid in t_ids:
        tr = feeder.transformers[tid]
        vals = np.zeros(HOURS_PER_YEAR)
        for mid in tr.meters:
            vals += meters[mid].baseload.values
        base_tr[tid] = vals

    t_state = {tid: float(ambient[0]) for tid in t_ids}
    a_state = {tid: feeder.transformers[tid].initial_age for tid in t_ids}
    failure = np.zeros((len(t_ids), horizon))
    counts_hp, counts_ev = [], []

    for y in range(1, horizon + 1):
        cal_year = feeder.base_year + y - 1
        adopted = adopt_mod.draw_adoptions(
            meters, cal_year, curve_hp, curve_ev, total,
            rng=lambda mid: substream(child, "adopt", mid, cal_year),
        )
        n_hp = n_ev = 0
        for mid, kind in adopted:
            m = meters[mid]
            if kind == adopt_mod.HP:
                dev = profiles.sample_hp_device(
                    substream(child, "hp-device", mid, y), cop=config.hp_cop
                )
                meters[mid] = replace(m, has_hp=True, hp_params=dev)
                hp_loads[mid] = profiles.hp_profile(dev, temp_c)
                n_hp += 1
            else:
                dev = profiles.sample_ev_device(substream(child, "ev-device", mid, y))
                meters[mid] = replace(m, has_ev=True, ev_params=dev)
                n_ev += 1
        counts_hp.append(n_hp)
        counts_ev.append(n_ev)

        # device load increments on top of the static baseload sums
        device_tr: dict[str, np.ndarray] = {}
        for mid in sorted(meters):
            m = meters[mid]
            if not (m.has_hp or m.has_ev):
                continue
            extra = np.zeros(HOURS_PER_YEAR)
            if m.has_hp:
                extra += hp_loads[mid]
            if m.has_ev:
                result = profiles.ev_profile(
                    substream(child, "ev-profile", mid, y), m.ev_params, n_days=365
                )
                extra += result.load_kw
                meters[mid] = replace(
                    m, ev_params=replace(m.ev_params, battery_level=result.end_level)
                )
            tid = m.transformer_id
            if tid in device_tr:
                device_tr[tid] += extra
            else:
                device_tr[tid] = extra

        for tid in t_ids:
            tr = feeder.transformers[tid]
            load = base_tr[tid]
            if tid in device_tr:
                load = load + device_tr[tid]
            denom = tr.rating_kva * tr.capacity_scale * config.capacity_scale
            t_end, a_end = thermal.simulate_transformer_year(
                load / denom, ambient, t_state[tid], a_state[tid]
            )
            t_state[tid] = t_end
            a_state[tid] = a_end
            failure[t_index[tid], y - 1] = thermal.failure_probability(a_end)

    age_gain = np.array(
        [a_state[tid] - feeder.transformers[tid].initial_age for tid in t_ids]
    )
    return RealizationResult(
        index=index,
        failure=failure,
        adoptions_hp=tuple(counts_hp),
        adoptions_ev=tuple(counts_ev),
        age_gain=age_gain,
    )


def aggregate_curves(results: list[RealizationResult], transformer_ids) -> FailureCurveSet:
    """Elementwise mean of failure matrices, in fixed realization order."""
    if not results:
        raise DataError("no realizations to aggregate")
    shapes = {r.failure.shape for r in results}
    if len(shapes) != 1:
        raise StructuralError(f"realization matrices have mixed shapes {shapes}")
    ordered = sorted(results, key=lambda r: r.index)
    stacked = np.stack([r.failure for r in ordered])
    return FailureCurveSet(tuple(transformer_ids), stacked.mean(axis=0))


def convergence_diagnostic(
    curves_a: FailureCurveSet, curves_b: FailureCurveSet
) -> tuple[float, dict[str, float]]:
    """Max absolute curve difference, overall and per transformer."""
    if curves_a.transformer_ids != curves_b.transformer_ids:
        raise StructuralError("curve sets cover different transformers")
    if curves_a.horizon != curves_b.horizon:
        raise StructuralError("curve sets have different horizons")
    diff = np.abs(curves_a.curves - curves_b.curves)
    per = {tid: float(diff[i].max()) for i, tid in enumerate(curves_a.transformer_ids)}
    return float(diff.max()), per


_WORKER_CTX: dict = {}


def _init_worker(config, feeder, curve_hp, curve_ev):
    _WORKER_CTX.update(
        config=config, feeder=feeder, curve_hp=curve_hp, curve_ev=curve_ev
    )


def _run_indexed(index: int) -> RealizationResult:
    c = _WORKER_CTX
    return run_realization(index, c["config"], c["feeder"], c["curve_hp"], c["curve_ev"])


def run_simulation(
    feeder: FeederData,
    config: ScenarioConfig,
    curve_hp: adopt_mod.GrowthCurve,
    curve_ev: adopt_mod.GrowthCurve,
    workers: Optional[int] = None,
) -> tuple[FailureCurveSet, dict]:
    """Run all realizations (optionally in parallel) and average the curves."""
    indices = list(range(config.realizations))
    if workers is None or workers <= 1:
        _init_worker(config, feeder, curve_hp, curve_ev)
        results = [_run_indexed(i) for i in indices]
    else:
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_init_worker,
            initargs=(config, feeder, curve_hp, curve_ev),
        ) as pool:
            results = list(pool.map(_run_indexed, indices, chunksize=8))
    results.sort(key=lambda r: r.index)

    t_ids = sorted(feeder.transformers)
    curves = aggregate_curves(results, t_ids)
    mean_gain = np.mean([r.age_gain for r in results], axis=0)
    summary = {
        "realizations": config.realizations,
        "horizon_years": config.horizon_years,
        "base_year": feeder.base_year,
        "master_seed": config.master_seed,
        "capacity_scale": config.capacity_scale,
        "growth": {
            "hp": {"f_max": curve_hp.f_max, "t50": curve_hp.t50, "a": curve_hp.a},
            "ev": {"f_max": curve_ev.f_max, "t50": curve_ev.t50, "a": curve_ev.a},
        },
        "mean_adoptions_per_year": {
            "hp": np.mean([r.adoptions_hp for r in results], axis=0).tolist(),
            "ev": np.mean([r.adoptions_ev for r in results], axis=0).tolist(),
        },
        "zero_aging_transformer_fraction": float(
            np.mean(mean_gain < 1e-3)
        ),
        "transformers": len(t_ids),
        "meters": len(feeder.meters),
    }
    return curves, summary


def write_summary(summary: dict, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
