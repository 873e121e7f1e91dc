"""Comparison policies: threshold, equal-split rules, and receding horizon."""

import math

import numpy as np
import pytest

from peakmin.baselines import (
    FUTURE_LOWER,
    FUTURE_MIDPOINT,
    FUTURE_UPPER,
    RhcConfig,
    run_equal_discharge,
    run_equal_ratio,
    run_rhc,
    run_threshold,
)
from peakmin.core import DemandProfile, Instance
from peakmin.offline import solve_offline_pmd

from conftest import random_profiles


@pytest.fixture(scope="module")
def two_one_instance():
    return Instance(capacity_c=1.0, rate_limit=None, horizon_T=2, demand_lb=1.0, demand_ub=2.0)


@pytest.fixture(scope="module")
def two_one_profile(two_one_instance):
    return DemandProfile(two_one_instance, [2.0, 1.0])


def test_threshold_above_ceiling_discharges_nothing(two_one_instance, two_one_profile):
    run = run_threshold(two_one_instance, two_one_profile, threshold=2.0)
    assert np.array_equal(run.schedule.values, np.zeros(2))
    assert run.final_peak == pytest.approx(2.0)
    assert run.inventory_spent == 0.0
    assert run.ratio_trajectory.size == 0


def test_threshold_zero_flattens_demand_on_boundary_capacity():
    """With c equal to the whole consumption the zero threshold erases it."""
    instance = Instance(capacity_c=2.0, rate_limit=None, horizon_T=2, demand_lb=1.0, demand_ub=2.0)
    run = run_threshold(instance, DemandProfile(instance, [1.0, 1.0]), threshold=0.0)
    assert np.array_equal(run.schedule.values, np.array([1.0, 1.0]))
    assert run.final_peak == pytest.approx(0.0)
    assert run.inventory_spent == pytest.approx(2.0)


def test_threshold_hand_trace(two_one_instance, two_one_profile):
    run = run_threshold(two_one_instance, two_one_profile, threshold=1.5)
    assert run.schedule.values == pytest.approx([0.5, 0.0])
    assert run.final_peak == pytest.approx(1.5)


def test_threshold_spends_greedily_until_empty(two_one_instance):
    """A low threshold drains the inventory on the first slots it can."""
    run = run_threshold(two_one_instance, DemandProfile(two_one_instance, [2.0, 2.0]), 0.5)
    assert run.schedule.values == pytest.approx([1.0, 0.0])
    assert run.inventory_spent == pytest.approx(1.0)


def test_threshold_rejects_negative(two_one_instance, two_one_profile):
    with pytest.raises(ValueError):
        run_threshold(two_one_instance, two_one_profile, threshold=-0.1)


def test_equal_discharge_uniform_demand():
    instance = Instance(capacity_c=8.0, rate_limit=None, horizon_T=4, demand_lb=2.0, demand_ub=4.0)
    run = run_equal_discharge(instance, DemandProfile(instance, [3.0, 3.0, 3.0, 3.0]))
    assert run.schedule.values == pytest.approx([2.0, 2.0, 2.0, 2.0])
    assert run.final_peak == pytest.approx(1.0)


def test_equal_discharge_hand_trace(two_one_instance, two_one_profile):
    run = run_equal_discharge(two_one_instance, two_one_profile)
    assert run.schedule.values == pytest.approx([0.5, 0.5])
    assert run.final_peak == pytest.approx(1.5)


def test_equal_discharge_quota_capped_by_rate_limit():
    """A rate limit below c/T leaves inventory stranded: the per-slot quota is
    not carried over to later slots."""
    instance = Instance(capacity_c=2.0, rate_limit=0.5, horizon_T=2, demand_lb=1.0, demand_ub=2.0)
    run = run_equal_discharge(instance, DemandProfile(instance, [2.0, 2.0]))
    assert run.schedule.values == pytest.approx([0.5, 0.5])
    assert run.inventory_spent == pytest.approx(1.0)
    assert run.inventory_spent < instance.capacity_c


def test_equal_ratio_zero_rate_is_idle(two_one_instance, two_one_profile):
    run = run_equal_ratio(two_one_instance, two_one_profile, capacity_rate=0.0)
    assert np.array_equal(run.schedule.values, np.zeros(2))


def test_equal_ratio_full_rate_tracks_demand_until_empty():
    instance = Instance(capacity_c=2.0, rate_limit=None, horizon_T=2, demand_lb=1.0, demand_ub=3.0)
    run = run_equal_ratio(instance, DemandProfile(instance, [1.5, 3.0]), capacity_rate=1.0)
    assert run.schedule.values == pytest.approx([1.5, 0.5])
    assert run.inventory_spent == pytest.approx(instance.capacity_c)


def test_equal_ratio_hand_trace(two_one_instance, two_one_profile):
    run = run_equal_ratio(two_one_instance, two_one_profile, capacity_rate=0.25)
    assert run.schedule.values == pytest.approx([0.5, 0.25])


def test_equal_ratio_rejects_rate_outside_unit_interval(two_one_instance, two_one_profile):
    for rate in (-0.01, 1.01):
        with pytest.raises(ValueError):
            run_equal_ratio(two_one_instance, two_one_profile, capacity_rate=rate)


def test_rhc_config_validation():
    with pytest.raises(ValueError):
        RhcConfig(window=0)
    with pytest.raises(ValueError):
        RhcConfig(future_view="average")
    with pytest.raises(ValueError):
        RhcConfig(window=5).resolve_window(4)


def test_rhc_config_default_window_is_quarter_horizon():
    for horizon in (2, 4, 8, 10, 12):
        assert RhcConfig().resolve_window(horizon) == math.ceil(horizon / 4)


def test_rhc_config_future_values(two_one_instance):
    assert RhcConfig(future_view=FUTURE_UPPER).future_value(two_one_instance) == 2.0
    assert RhcConfig(future_view=FUTURE_LOWER).future_value(two_one_instance) == 1.0
    assert RhcConfig(future_view=FUTURE_MIDPOINT).future_value(two_one_instance) == 1.5


def test_rhc_clairvoyant_full_window_is_offline(tiny_instance):
    """Given the true demands and the whole horizon, committing first actions
    one slot at a time re-derives the offline schedule exactly when discharge
    is unconstrained. A binding rate limit can strand budget that the
    re-solves later spend on slots the offline solution left alone; the
    schedules then differ but both attain the offline peak."""
    exact = [
        tiny_instance,
        Instance(capacity_c=2.5, rate_limit=None, horizon_T=4, demand_lb=1.0, demand_ub=3.0),
        Instance(capacity_c=4.0, rate_limit=None, horizon_T=6, demand_lb=0.8, demand_ub=2.0),
    ]
    for k, instance in enumerate(exact):
        config = RhcConfig(window=instance.horizon_T)
        for row in random_profiles(instance, 60, seed=30 + k):
            demand = DemandProfile(instance, row)
            run = run_rhc(instance, demand, config, clairvoyant=True)
            offline = solve_offline_pmd(instance, demand)
            assert np.allclose(run.schedule.values, offline.schedule.values, atol=1e-9)
            assert run.final_peak == pytest.approx(offline.peak, abs=1e-9)
    limited = Instance(capacity_c=1.8, rate_limit=0.7, horizon_T=5, demand_lb=0.5, demand_ub=2.0)
    config = RhcConfig(window=limited.horizon_T)
    for row in random_profiles(limited, 60, seed=33):
        demand = DemandProfile(limited, row)
        run = run_rhc(limited, demand, config, clairvoyant=True)
        assert run.final_peak == pytest.approx(solve_offline_pmd(limited, demand).peak, abs=1e-9)


def test_rhc_single_slot_window_discharges_maximally(two_one_instance):
    """A one-slot window sees no future, so the offline step inside it spends
    as much as the slot and the inventory allow."""
    run = run_rhc(
        two_one_instance,
        DemandProfile(two_one_instance, [2.0, 2.0]),
        RhcConfig(window=1, future_view=FUTURE_UPPER),
    )
    assert run.schedule.values == pytest.approx([1.0, 0.0])


def test_rhc_myopic_overspend_hand_trace(two_one_instance):
    """[1, 2] with window 1: the whole unit is dumped on the cheap slot and
    the tall slot goes unserved."""
    run = run_rhc(two_one_instance, DemandProfile(two_one_instance, [1.0, 2.0]), RhcConfig(window=1))
    assert run.schedule.values == pytest.approx([1.0, 0.0])
    assert run.final_peak == pytest.approx(2.0)


def test_rhc_lower_view_spends_earlier_than_upper(two_one_instance):
    """Assuming cheap futures makes the controller discharge sooner; assuming
    expensive futures makes it hold back inventory."""
    demand = DemandProfile(two_one_instance, [2.0, 2.0])
    lower = run_rhc(two_one_instance, demand, RhcConfig(window=2, future_view=FUTURE_LOWER))
    upper = run_rhc(two_one_instance, demand, RhcConfig(window=2, future_view=FUTURE_UPPER))
    assert lower.schedule.values[0] > upper.schedule.values[0]


def test_all_baselines_emit_feasible_schedules():
    """DischargeSchedule construction inside each runner enforces feasibility,
    so surviving a fuzz batch is the property."""
    instances = [
        Instance(capacity_c=1.0, rate_limit=None, horizon_T=2, demand_lb=1.0, demand_ub=2.0),
        Instance(capacity_c=2.0, rate_limit=0.9, horizon_T=4, demand_lb=0.8, demand_ub=3.0),
        Instance(capacity_c=4.5, rate_limit=None, horizon_T=6, demand_lb=1.0, demand_ub=2.5),
    ]
    for k, instance in enumerate(instances):
        mid = 0.5 * (instance.demand_lb + instance.demand_ub)
        for row in random_profiles(instance, 80, seed=60 + k):
            demand = DemandProfile(instance, row)
            runs = [
                run_threshold(instance, demand, mid),
                run_equal_discharge(instance, demand),
                run_equal_ratio(instance, demand, 0.3),
                run_rhc(instance, demand, RhcConfig(window=2, future_view=FUTURE_UPPER)),
                run_rhc(instance, demand, RhcConfig(window=2, future_view=FUTURE_LOWER)),
                run_rhc(instance, demand, RhcConfig()),
            ]
            for run in runs:
                assert run.inventory_spent <= instance.capacity_c + 1e-9
                assert run.ratio_trajectory.size == 0
                assert run.final_peak == pytest.approx(
                    float((demand.values - run.schedule.values).max())
                )
