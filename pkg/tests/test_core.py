import numpy as np
import pytest

from gridaging.core import (
    ConfigError,
    DataError,
    FailureCurveSet,
    HourlyTimeSeries,
    Meter,
    ScenarioConfig,
    StructuralError,
    TopologyError,
    Transformer,
    aggregate_transformer_load,
    per_unit_load,
)

from helpers import EPOCH, constant_series, series


def make_transformer(meters, rating=25.0, scale=1.0):
    return Transformer(id="T1", rating_kva=rating, meters=frozenset(meters),
                       capacity_scale=scale)


class TestHourlyTimeSeries:
    def test_rejects_bad_length(self):
        with pytest.raises(StructuralError):
            HourlyTimeSeries(EPOCH, np.ones(23))

    def test_rejects_non_finite(self):
        with pytest.raises(StructuralError):
            HourlyTimeSeries(EPOCH, np.array([np.nan] * 24))

    def test_values_are_read_only(self):
        s = constant_series(1.0, 24)
        with pytest.raises(ValueError):
            s.values[0] = 2.0


class TestAggregation:
    def test_constant_meters_sum(self):
        loads = {"a": constant_series(1.0, 24), "b": constant_series(2.5, 24)}
        tr = make_transformer(["a", "b"])
        out = aggregate_transformer_load(tr, loads)
        assert np.allclose(out.values, 3.5)

    def test_empty_meter_set_is_zero(self):
        tr = make_transformer([])
        out = aggregate_transformer_load(tr, {}, template=constant_series(9.0, 48))
        assert np.all(out.values == 0.0) and len(out) == 48

    def test_matches_independent_summation(self):
        rng = np.random.default_rng(11)
        loads = {m: series(rng.uniform(0, 5, 72)) for m in ("a", "b", "c")}
        tr = make_transformer(["a", "b", "c"])
        out = aggregate_transformer_load(tr, loads)
        # second pass: accumulate hour by hour, independently of the op
        expected = [sum(loads[m].values[h] for m in ("a", "b", "c")) for h in range(72)]
        assert np.array_equal(out.values, np.array(expected))

    def test_permutation_invariant(self):
        rng = np.random.default_rng(5)
        loads = {f"m{i}": series(rng.uniform(0, 3, 24)) for i in range(6)}
        forward = aggregate_transformer_load(make_transformer(list(loads)), loads)
        backward = aggregate_transformer_load(
            make_transformer(list(reversed(list(loads)))), loads
        )
        assert np.array_equal(forward.values, backward.values)

    def test_unknown_meter(self):
        with pytest.raises(TopologyError):
            aggregate_transformer_load(make_transformer(["ghost"]), {})

    def test_mismatched_lengths(self):
        loads = {"a": constant_series(1.0, 24), "b": constant_series(1.0, 48)}
        with pytest.raises(StructuralError):
            aggregate_transformer_load(make_transformer(["a", "b"]), loads)


class TestPerUnit:
    def test_at_rating(self):
        out = per_unit_load(constant_series(25.0, 24), make_transformer([], rating=25.0))
        assert np.allclose(out.values, 1.0)

    def test_capacity_scale(self):
        tr = make_transformer([], rating=25.0, scale=1.5)
        out = per_unit_load(constant_series(25.0, 24), tr)
        assert np.allclose(out.values, 25.0 / 37.5)

    def test_zero_load(self):
        out = per_unit_load(constant_series(0.0, 24), make_transformer([]))
        assert np.all(out.values == 0.0)

    def test_doubling_scale_halves_per_unit(self):
        rng = np.random.default_rng(2)
        load = series(rng.uniform(0, 40, 24))
        one = per_unit_load(load, make_transformer([], scale=1.0))
        two = per_unit_load(load, make_transformer([], scale=2.0))
        assert np.array_equal(one.values / 2.0, two.values)


class TestValidation:
    def test_meter_requires_device_params(self):
        with pytest.raises(DataError):
            Meter(id="m", transformer_id="t", baseload=constant_series(1.0, 24),
                  has_hp=True)

    def test_transformer_rating_positive(self):
        with pytest.raises(ConfigError):
            Transformer(id="t", rating_kva=0.0)

    def test_scenario_cost_ordering(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(cost_upgrade=10.0, cost_failure=5.0)

    def test_scenario_return_rate(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(return_rate=1.0)


class TestFailureCurveSet:
    def test_rejects_non_monotone(self):
        with pytest.raises(DataError):
            FailureCurveSet(("a",), np.array([[0.5, 0.2]]))

    def test_rejects_out_of_range(self):
        with pytest.raises(DataError):
            FailureCurveSet(("a",), np.array([[0.5, 1.2]]))

    def test_csv_round_trip(self, tmp_path):
        curves = FailureCurveSet(("a", "b"), np.array([[0.0, 0.25], [0.1, 0.1]]))
        path = tmp_path / "curves.csv"
        curves.to_csv(path)
        back = FailureCurveSet.from_csv(path)
        assert back.transformer_ids == curves.transformer_ids
        assert np.array_equal(back.curves, curves.curves)
