"""Independent brute-force oracles used to cross-check the closed forms.

Everything here is deliberately slow and simple: grid searches and
first-principles recomputations with no shared code paths with the package
internals beyond the public dataclasses.
"""

from __future__ import annotations

import itertools

import numpy as np


def waterfill_oracle(demands, budget: float) -> float:
    """Water level via direct bisection on total-excess(v) = budget."""
    d = np.asarray(demands, dtype=float)
    lo, hi = 0.0, float(d.max())
    if budget <= 0:
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        excess = np.clip(d - mid, 0.0, None).sum()
        if excess > budget:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def offline_peak_grid(demands, budget: float, rate_limit, step: float) -> float:
    """Exhaustive grid search over feasible discharge schedules (tiny T only)."""
    d = np.asarray(demands, dtype=float)
    T = len(d)
    axes = []
    for t in range(T):
        cap = d[t] if rate_limit is None else min(rate_limit, d[t])
        axes.append(np.arange(0.0, cap + step / 2, step))
    best = float(d.max())
    for combo in itertools.product(*axes):
        sched = np.array(combo)
        if sched.sum() > budget + 1e-12:
            continue
        best = min(best, float((d - sched).max()))
    return best


def reference_peak(prefix, d_lb: float, horizon: int, budget: float) -> float:
    """Offline peak of the observed prefix padded with the demand floor."""
    ref = np.concatenate([np.asarray(prefix, float), np.full(horizon - len(prefix), d_lb)])
    return waterfill_oracle(ref, budget)


def total_discharge_forced(instance, pi: float, profile) -> float:
    """Total discharge the fixed-ratio policy makes on one profile (unclamped)."""
    total = 0.0
    for t in range(1, instance.horizon_T + 1):
        v = reference_peak(profile[:t], instance.demand_lb, instance.horizon_T,
                           instance.capacity_c)
        total += max(0.0, profile[t - 1] - pi * v)
    return total


def phi_grid_oracle(instance, pi: float, grid_step: float) -> float:
    """Maximum forced total discharge over the full demand grid (tiny T only)."""
    lo, hi = instance.demand_lb, instance.demand_ub
    values = np.arange(lo, hi + 1e-9, grid_step)
    best = 0.0
    for profile in itertools.product(values, repeat=instance.horizon_T):
        best = max(best, total_discharge_forced(instance, pi, profile))
    return best


def cr_ratio_oracle(instance, index_set, grid_step: float) -> float:
    """Worst ratio (sum demands - c) / (sum reference peaks) over a demand grid.

    Only the slots in index_set vary; the trailing slots never enter the
    objective, so the grid runs over prefixes of length max(index_set).
    """
    idx = sorted(index_set)
    depth = idx[-1]
    lo, hi = instance.demand_lb, instance.demand_ub
    c = instance.capacity_c
    values = np.arange(lo, hi + 1e-9, grid_step)
    best = -np.inf
    for prefix in itertools.product(values, repeat=depth):
        num = sum(prefix[i - 1] for i in idx) - c
        den = sum(
            reference_peak(prefix[:i], lo, instance.horizon_T, c) for i in idx
        )
        if den > 1e-12:
            best = max(best, num / den)
    return best
