"""Exact offline optimum for the peak-demand minimization problem, plus the
cost functional of the weighted (demand-charge) variant.

The offline optimum admits a closed form: with v the water-filling threshold
solving sum_t [d_t - v]^+ = c and M = max_t [d_t - rate - v]^+ the rate
correction, the unique optimal schedule is delta_t = [d_t - M - v]^+.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EPS_KWH, DemandProfile, DischargeSchedule, Instance
from .errors import BudgetExceedsTotalDemand, InfeasibleSchedule, InvalidCmdWeights


def water_fill_threshold(demands, budget: float) -> float:
    """Level v such that the total demand above v equals the budget.

    Exact sort-and-breakpoint evaluation (no bisection): over demands sorted
    descending with prefix sums S_k, v = max_k (S_k - budget)/k. A zero budget
    returns max(demands).
    """
    d = np.asarray(demands, dtype=float)
    if budget < 0:
        raise BudgetExceedsTotalDemand(f"budget must be >= 0, got {budget}")
    total = d.sum()
    if budget > 0 and budget > total + EPS_KWH:
        raise BudgetExceedsTotalDemand(f"budget {budget} > total demand {total}")
    s = np.sort(d)[::-1]
    prefix = np.cumsum(s)
    k = np.arange(1, len(d) + 1, dtype=float)
    return float(((prefix - budget) / k).max())


def water_fill_threshold_rows(demand_rows: np.ndarray, budget: float) -> np.ndarray:
    """Row-wise water_fill_threshold for an (N, T) matrix (oracle bulk path)."""
    s = -np.sort(-demand_rows, axis=1)
    prefix = np.cumsum(s, axis=1)
    k = np.arange(1, demand_rows.shape[1] + 1, dtype=float)
    return ((prefix - budget) / k).max(axis=1)


@dataclass(frozen=True)
class OfflineSolution:
    """Water level v, the optimal schedule, and the optimal peak max(d_t - delta_t)."""

    schedule: DischargeSchedule
    threshold_v: float
    peak: float


def solve_offline_pmd(instance: Instance, demand: DemandProfile) -> OfflineSolution:
    """Closed-form offline optimum; peak is computed from the schedule, not from v."""
    d = demand.values
    v = water_fill_threshold(d, instance.capacity_c)
    if instance.rate_limit is None:
        m = 0.0
    else:
        m = float(max(0.0, (d - instance.rate_limit - v).max()))
    raw = np.clip(d - m - v, 0.0, None)
    schedule = DischargeSchedule(instance, demand, raw)
    peak = float((d - schedule.values).max())
    return OfflineSolution(schedule=schedule, threshold_v=v, peak=peak)


def offline_peak(instance: Instance, demand: DemandProfile) -> float:
    return solve_offline_pmd(instance, demand).peak


def offline_peak_values(instance: Instance, values: np.ndarray) -> float:
    """offline_peak on a raw vector; fast path for policy inner loops."""
    v = water_fill_threshold(values, instance.capacity_c)
    if instance.rate_limit is None:
        return v
    m = max(0.0, float((values - instance.rate_limit - v).max()))
    return float((values - np.clip(values - m - v, 0.0, None)).max())


@dataclass(frozen=True)
class CmdWeights:
    """Per-slot energy prices w_e ($/kWh) and the peak price w_p ($/kWh).

    Construction enforces w_p >= T * max_{i,j}(w_e_i - w_e_j); under that
    assumption the weighted problem shares the plain problem's offline optimum.
    """

    energy_weights: tuple[float, ...]
    peak_weight: float

    def __post_init__(self):
        w = np.asarray(self.energy_weights, dtype=float)
        if len(w) == 0:
            raise InvalidCmdWeights("energy_weights must be nonempty")
        spread = float(w.max() - w.min())
        bound = len(w) * spread
        if self.peak_weight < bound - 1e-12:
            raise InvalidCmdWeights(
                f"peak_weight {self.peak_weight} < T*max spread {bound}"
            )
        object.__setattr__(self, "energy_weights", tuple(float(x) for x in w))


def evaluate_cmd_cost(weights: CmdWeights, demand: DemandProfile, schedule: DischargeSchedule) -> float:
    """sum_t w_e_t (d_t - delta_t) + w_p * max_t (d_t - delta_t)."""
    w = np.asarray(weights.energy_weights, dtype=float)
    if len(w) != len(demand):
        raise InfeasibleSchedule(
            f"weights length {len(w)} != profile length {len(demand)}"
        )
    purchased = demand.values - schedule.values
    return float(w @ purchased + weights.peak_weight * purchased.max())
