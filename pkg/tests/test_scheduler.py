import numpy as np
import pytest

from gridaging.core import ConfigError, DataError, FailureCurveSet
from gridaging.scheduler import (
    CostModel,
    Schedule,
    brute_force_schedule,
    candidate_indices,
    effective_costs,
    expected_failures,
    read_schedule,
    schedule_objective,
    schedule_weights,
    solve_schedule,
    validate_schedule,
    write_expected_failures,
    write_schedule,
)


def _curves(matrix, ids=None):
    matrix = np.asarray(matrix, dtype=float)
    if ids is None:
        ids = tuple(f"T{i + 1}" for i in range(matrix.shape[0]))
    return FailureCurveSet(ids, matrix)


def _random_instance(rng, n, horizon):
    increments = rng.uniform(0, 0.25, (n, horizon)) * rng.integers(0, 2, (n, horizon))
    curves = np.minimum(np.cumsum(increments, axis=1), 1.0)
    cu = rng.uniform(1.0, 8.0)
    model = CostModel(
        upgrade_cost=cu,
        failure_cost=cu + rng.uniform(1.0, 60.0),
        return_rate=rng.uniform(0.0, 0.08),
    )
    return model, _curves(curves)


class TestEffectiveCosts:
    def test_deferral_factor(self):
        model = CostModel(upgrade_cost=5.0, failure_cost=50.0, return_rate=0.02)
        curves = _curves([[0.0, 0.0, 0.0, 0.1]])
        cu, cf_cum = effective_costs(model, curves)
        expected = 5.0 * (2.0 - 1.02 ** np.arange(4))
        np.testing.assert_allclose(cu[0], expected, atol=1e-12)
        # upgrading later is always cheaper
        assert np.all(np.diff(cu[0]) < 0)

    def test_cumulative_failure_cost(self):
        model = CostModel(upgrade_cost=5.0, failure_cost=50.0, return_rate=0.0)
        curves = _curves([[0.1, 0.3, 0.3]])
        _, cf_cum = effective_costs(model, curves)
        np.testing.assert_allclose(cf_cum[0], [5.0, 15.0, 15.0], atol=1e-12)

    def test_discounted_failure_cost(self):
        model = CostModel(upgrade_cost=5.0, failure_cost=50.0, return_rate=0.05)
        curves = _curves([[0.2, 0.5]])
        _, cf_cum = effective_costs(model, curves)
        f1 = 50.0 * 0.2 * (2.0 - 1.05**0)
        f2 = 50.0 * 0.3 * (2.0 - 1.05**1)
        np.testing.assert_allclose(cf_cum[0], [f1, f1 + f2], atol=1e-12)

    def test_decreasing_curve_rejected(self):
        model = CostModel()
        with pytest.raises(DataError):
            # bypass FailureCurveSet's own check via a raw construction attempt
            effective_costs(model, _curves([[0.5, 0.2]]))

    def test_per_transformer_cost_maps(self):
        model = CostModel(upgrade_cost={"T1": 3.0, "T2": 6.0}, failure_cost=50.0)
        curves = _curves([[0.1], [0.1]])
        cu, _ = effective_costs(model, curves)
        np.testing.assert_allclose(cu[:, 0], [3.0, 6.0], atol=1e-12)
        with pytest.raises(ConfigError, match="missing entries"):
            effective_costs(model, _curves([[0.1]], ids=("T9",)))

    def test_failure_cost_must_dominate(self):
        with pytest.raises(ConfigError):
            CostModel(upgrade_cost=5.0, failure_cost=4.0).cost_vectors(("T1",))


class TestScheduleWeights:
    def test_constant_is_no_upgrade_cost(self):
        model = CostModel(upgrade_cost=5.0, failure_cost=50.0, return_rate=0.0)
        curves = _curves([[0.1, 0.4], [0.0, 0.2]])
        w, constant = schedule_weights(model, curves)
        assert constant == pytest.approx(50.0 * (0.4 + 0.2), abs=1e-12)
        empty = Schedule({})
        assert schedule_objective(model, curves, empty) == pytest.approx(constant, abs=1e-12)

    def test_flat_curve_never_worth_upgrading(self):
        model = CostModel(upgrade_cost=5.0, failure_cost=50.0, return_rate=0.0)
        w, _ = schedule_weights(model, _curves([[0.3, 0.3, 0.3]]))
        assert np.all(w > 0)


class TestSolveSchedule:
    MODEL = CostModel(upgrade_cost=5.0, failure_cost=50.0, return_rate=0.02)

    def test_no_risk_no_upgrades(self):
        schedule, obj = solve_schedule(self.MODEL, _curves([[0.0, 0.0]]), n_max=2)
        assert schedule.upgrades == {}
        assert obj == pytest.approx(0.0, abs=1e-12)

    def test_matches_per_transformer_optimum_when_capacity_slack(self):
        rng = np.random.default_rng(8)
        model, curves = _random_instance(rng, 5, 6)
        schedule, obj = solve_schedule(model, curves, n_max=5)
        w, constant = schedule_weights(model, curves)
        best = constant
        for x in candidate_indices(curves):
            best += min(0.0, w[x].min())
        assert obj == pytest.approx(best, abs=1e-9)

    def test_capacity_forces_spreading(self):
        # both transformers prefer year 1; capacity 1 pushes one to year 2
        curves = _curves([[0.0, 0.4, 0.9], [0.0, 0.35, 0.85]])
        schedule, obj = solve_schedule(self.MODEL, curves, n_max=1)
        assert sorted(schedule.upgrades.values()) == [1, 2]
        bf_schedule, bf_obj = brute_force_schedule(self.MODEL, curves, n_max=1)
        assert obj == bf_obj

    def test_earliest_year_tie_break(self):
        # flat-then-rising curve: upgrading in year 1 or 2 costs the same
        model = CostModel(upgrade_cost=5.0, failure_cost=50.0, return_rate=0.0)
        curves = _curves([[0.0, 0.0, 0.5]])
        schedule, _ = solve_schedule(model, curves, n_max=1)
        assert schedule.upgrades == {"T1": 1}

    def test_agrees_with_brute_force_on_random_instances(self):
        rng = np.random.default_rng(99)
        for _ in range(50):
            model, curves = _random_instance(rng, int(rng.integers(1, 5)), 3)
            n_max = int(rng.integers(1, 4))
            _, obj = solve_schedule(model, curves, n_max)
            _, bf_obj = brute_force_schedule(model, curves, n_max)
            assert obj == bf_obj

    def test_invalid_capacity(self):
        with pytest.raises(ConfigError):
            solve_schedule(self.MODEL, _curves([[0.1]]), n_max=0)
        with pytest.raises(ConfigError):
            brute_force_schedule(self.MODEL, _curves([[0.1]]), n_max=0)

    def test_brute_force_size_guard(self):
        curves = _curves(np.tile(np.linspace(0.1, 0.5, 5), (4, 1)))
        with pytest.raises(ValueError, match="too large"):
            brute_force_schedule(self.MODEL, curves, n_max=1)


class TestValidateSchedule:
    CURVES = _curves([[0.1, 0.2], [0.1, 0.2], [0.1, 0.2]])

    def test_capacity_violation(self):
        schedule = Schedule({"T1": 1, "T2": 1, "T3": 1}, n_max=2)
        with pytest.raises(DataError, match="capacity"):
            validate_schedule(schedule, self.CURVES)

    def test_unknown_transformer(self):
        with pytest.raises(DataError, match="unknown transformer"):
            validate_schedule(Schedule({"T9": 1}, n_max=1), self.CURVES)

    def test_year_outside_horizon(self):
        with pytest.raises(DataError, match="outside horizon"):
            validate_schedule(Schedule({"T1": 3}, n_max=1), self.CURVES)


class TestExpectedFailures:
    def test_no_upgrades_sums_increments(self):
        curves = _curves([[0.1, 0.3, 0.6], [0.0, 0.2, 0.2]])
        out = expected_failures(curves, Schedule({}))
        np.testing.assert_allclose(out, [0.1, 0.4, 0.3], atol=1e-12)

    def test_upgrade_cuts_failures_from_its_year(self):
        curves = _curves([[0.1, 0.3, 0.6]])
        out = expected_failures(curves, Schedule({"T1": 2}, n_max=1))
        np.testing.assert_allclose(out, [0.1, 0.0, 0.0], atol=1e-12)


class TestScheduleIo:
    def test_round_trip(self, tmp_path):
        schedule = Schedule({"T2": 3, "T1": 1}, n_max=4)
        path = tmp_path / "schedule.csv"
        write_schedule(schedule, path)
        assert path.read_text() == "transformer_id,upgrade_year\nT1,1\nT2,3\n"
        back = read_schedule(path, n_max=4)
        assert back.upgrades == schedule.upgrades

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "schedule.csv"
        path.write_text("nope,nope\n")
        with pytest.raises(DataError, match="header"):
            read_schedule(path)

    def test_expected_failures_file(self, tmp_path):
        curves = _curves([[0.1, 0.3]])
        path = tmp_path / "expected_failures.csv"
        write_expected_failures(curves, Schedule({"T1": 2}, n_max=1), path)
        lines = path.read_text().splitlines()
        assert lines[0] == "year,expected_count,planned_upgrades"
        assert lines[1] == "1,0.1,0"
        assert lines[2] == "2,0,1"
