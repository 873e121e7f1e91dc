"""Shared domain types: problem instances, demand profiles, schedules, online state.

Energies are kWh per slot throughout. Equality comparisons on energies use an
absolute tolerance of 1e-9 kWh (simplex output noise); the constant lives here
as EPS_KWH so every module agrees on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CapacityExceedsMinDemand,
    DemandOutOfBounds,
    InfeasibleSchedule,
    InvertedBounds,
    NonPositiveBound,
    PrefixOutOfBounds,
    ZeroHorizon,
)

EPS_KWH = 1e-9


def _as_float_vector(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError("expected a 1-D vector of kWh values")
    return arr


@dataclass(frozen=True)
class Instance:
    """Static problem data.

    capacity_c   total storage inventory for the period (kWh)
    rate_limit   per-slot discharge cap (kWh); None means unbounded
    horizon_T    number of slots in the operating period
    demand_lb    lower demand bound d_lb > 0 (kWh)
    demand_ub    upper demand bound d_ub >= d_lb (kWh)
    """

    capacity_c: float
    rate_limit: float | None
    horizon_T: int
    demand_lb: float
    demand_ub: float

    def __post_init__(self):
        if int(self.horizon_T) != self.horizon_T or self.horizon_T < 1:
            raise ZeroHorizon(f"horizon_T must be a positive integer, got {self.horizon_T}")
        if self.demand_lb <= 0:
            raise NonPositiveBound(f"demand_lb must be > 0, got {self.demand_lb}")
        if self.demand_ub < self.demand_lb:
            raise InvertedBounds(f"demand_ub {self.demand_ub} < demand_lb {self.demand_lb}")
        if self.rate_limit is not None and self.rate_limit <= 0:
            raise NonPositiveBound(f"rate_limit must be > 0 when present, got {self.rate_limit}")
        if self.capacity_c < 0:
            raise NonPositiveBound(f"capacity_c must be >= 0, got {self.capacity_c}")
        # standing assumption: the storage can never cover the whole period
        # by more than the minimum demand supplies
        if self.capacity_c > self.horizon_T * self.demand_lb + EPS_KWH:
            raise CapacityExceedsMinDemand(
                f"capacity_c {self.capacity_c} > horizon_T*demand_lb "
                f"{self.horizon_T * self.demand_lb}"
            )

    def slot_cap(self, demand_value: float) -> float:
        """Hard per-slot discharge cap min(rate_limit, d_t); branches on presence."""
        if self.rate_limit is None:
            return demand_value
        return min(self.rate_limit, demand_value)


def validate_instance(
    capacity_c: float,
    rate_limit: float | None,
    horizon_T: int,
    demand_lb: float,
    demand_ub: float,
) -> Instance:
    """Validate raw fields and return an Instance (raises domain errors otherwise)."""
    return Instance(
        capacity_c=float(capacity_c),
        rate_limit=None if rate_limit is None else float(rate_limit),
        horizon_T=int(horizon_T),
        demand_lb=float(demand_lb),
        demand_ub=float(demand_ub),
    )


class DemandProfile:
    """Length-T vector of per-slot demands, bound-checked against an Instance."""

    __slots__ = ("values",)

    def __init__(self, instance: Instance, values):
        arr = _as_float_vector(values)
        if len(arr) != instance.horizon_T:
            raise DemandOutOfBounds(
                f"profile length {len(arr)} != horizon_T {instance.horizon_T}"
            )
        lo, hi = instance.demand_lb, instance.demand_ub
        if (arr < lo - EPS_KWH).any() or (arr > hi + EPS_KWH).any():
            raise DemandOutOfBounds(
                f"demand entries outside [{lo}, {hi}]: {arr[(arr < lo - EPS_KWH) | (arr > hi + EPS_KWH)]}"
            )
        arr = np.clip(arr, lo, hi)
        arr.flags.writeable = False
        self.values = arr

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __repr__(self) -> str:
        return f"DemandProfile({self.values.tolist()})"


class DischargeSchedule:
    """Length-T vector of discharge decisions, feasibility-checked on construction."""

    __slots__ = ("values",)

    def __init__(self, instance: Instance, demand: DemandProfile, values):
        arr = _as_float_vector(values)
        if len(arr) != instance.horizon_T:
            raise InfeasibleSchedule(
                f"schedule length {len(arr)} != horizon_T {instance.horizon_T}"
            )
        if (arr < -EPS_KWH).any():
            raise InfeasibleSchedule(f"negative discharge: {arr.min()}")
        caps = np.minimum(demand.values, instance.rate_limit) if instance.rate_limit is not None else demand.values
        if (arr > caps + EPS_KWH).any():
            raise InfeasibleSchedule("discharge exceeds min(rate_limit, d_t) in some slot")
        if arr.sum() > instance.capacity_c + EPS_KWH:
            raise InfeasibleSchedule(
                f"total discharge {arr.sum()} exceeds capacity {instance.capacity_c}"
            )
        arr = np.clip(arr, 0.0, None)
        arr.flags.writeable = False
        self.values = arr

    def __len__(self) -> int:
        return len(self.values)

    def __repr__(self) -> str:
        return f"DischargeSchedule({self.values.tolist()})"


def reference_profile(instance: Instance, prefix) -> DemandProfile:
    """Observed prefix d_1..d_t padded with d_lb out to the horizon."""
    pre = _as_float_vector(prefix)
    t = len(pre)
    if not 1 <= t <= instance.horizon_T:
        raise PrefixOutOfBounds(f"prefix length {t} outside 1..{instance.horizon_T}")
    lo, hi = instance.demand_lb, instance.demand_ub
    if (pre < lo - EPS_KWH).any() or (pre > hi + EPS_KWH).any():
        raise PrefixOutOfBounds(f"prefix entries outside [{lo}, {hi}]")
    full = np.full(instance.horizon_T, lo, dtype=float)
    full[:t] = pre
    return DemandProfile(instance, full)


def reference_values(instance: Instance, prefix: np.ndarray) -> np.ndarray:
    """Unchecked fast path of reference_profile for policy inner loops."""
    full = np.full(instance.horizon_T, instance.demand_lb, dtype=float)
    full[: len(prefix)] = prefix
    return full


@dataclass
class OnlineState:
    """Causal state owned by a single policy run (single-writer).

    observe(d_t) then commit(delta_t) advance the state one slot. Between the
    two calls the state is mid-slot: `observed` already holds d_t while
    `actions` does not yet hold delta_t.
    """

    instance: Instance
    monthly_peak: float = 0.0
    prev_ratio: float = float("inf")
    observed: list[float] = field(default_factory=list)
    actions: list[float] = field(default_factory=list)
    inventory_used: float = 0.0
    running_peak: float = 0.0  # max over committed slots of (d_k - delta_k); 0 before slot 1

    def __post_init__(self):
        if self.monthly_peak < 0:
            raise NonPositiveBound(f"monthly_peak must be >= 0, got {self.monthly_peak}")
        if self.prev_ratio < 1.0 - 1e-6:
            raise ValueError(f"prev_ratio must be >= 1, got {self.prev_ratio}")

    @property
    def slot_index(self) -> int:
        """1-based index of the slot currently being decided."""
        return len(self.actions) + 1

    @property
    def remaining(self) -> float:
        return self.instance.capacity_c - self.inventory_used

    def observe(self, d_t: float) -> None:
        if len(self.observed) != len(self.actions):
            raise ValueError("observe() called twice without an intervening commit()")
        lo, hi = self.instance.demand_lb, self.instance.demand_ub
        if not (lo - EPS_KWH <= d_t <= hi + EPS_KWH):
            raise DemandOutOfBounds(f"observed demand {d_t} outside [{lo}, {hi}]")
        self.observed.append(float(d_t))

    def commit(self, delta_t: float) -> None:
        if len(self.observed) != len(self.actions) + 1:
            raise ValueError("commit() requires a preceding observe()")
        d_t = self.observed[-1]
        if delta_t < -EPS_KWH or delta_t > self.instance.slot_cap(d_t) + EPS_KWH:
            raise InfeasibleSchedule(
                f"slot {self.slot_index}: discharge {delta_t} violates [0, min(rate, {d_t})]"
            )
        if self.inventory_used + delta_t > self.instance.capacity_c + EPS_KWH:
            raise InfeasibleSchedule(
                f"slot {self.slot_index}: inventory overdraw ({self.inventory_used + delta_t} > {self.instance.capacity_c})"
            )
        delta_t = float(min(max(delta_t, 0.0), self.instance.slot_cap(d_t)))
        self.actions.append(delta_t)
        self.inventory_used += delta_t
        self.running_peak = max(self.running_peak, d_t - delta_t)
