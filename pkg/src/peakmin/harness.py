"""Trace ingestion, synthetic day generators, and the experiment driver.

Raw charging traces arrive as transactions (start time, duration, energy).
ingest_trace slots them into per-day on-peak demand profiles at constant
power. run_experiment replays a roster of policies over those days while
sweeping the storage capacity, and folds the resulting peaks into report
tables that render as plain text or plot-ready series rows.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from datetime import date, datetime, time, timedelta

import numpy as np

from .baselines import (
    FUTURE_LOWER,
    FUTURE_MIDPOINT,
    FUTURE_UPPER,
    RhcConfig,
    run_equal_discharge,
    run_equal_ratio,
    run_rhc,
    run_threshold,
)
from .core import DemandProfile, Instance, validate_instance
from .cr import optimal_cr
from .errors import EmptyTrace, MalformedRecord, MismatchedLengths, UnknownAlgorithm
from .offline import solve_offline_pmd
from .online import (
    MODE_ANYTIME,
    MODE_ANYTIME_DEPLETING,
    PolicyOptions,
    run_anytime,
    run_pcr_pmd,
)

logger = logging.getLogger(__name__)

TRACE_HEADER = ("start_iso8601", "duration_min", "energy_kwh")

ALGO_OFFLINE = "offline"
ALGO_FIXED = "fixed"
ALGO_ANYTIME = "anytime"
ALGO_ANYTIME_DEPLETE = "anytime-deplete"
ALGO_THR_OFFLINE_MEAN = "thr-offline-mean"
ALGO_THR_MID = "thr-mid"
ALGO_EQUAL_DISCHARGE = "eql-dis"
ALGO_EQUAL_RATIO = "eql-per"
ALGO_RHC_UPPER = "rhc-upper"
ALGO_RHC_LOWER = "rhc-lower"
ALGO_RHC_MID = "rhc-mid"

ALL_ALGORITHMS = (
    ALGO_OFFLINE,
    ALGO_FIXED,
    ALGO_ANYTIME,
    ALGO_ANYTIME_DEPLETE,
    ALGO_THR_OFFLINE_MEAN,
    ALGO_THR_MID,
    ALGO_EQUAL_DISCHARGE,
    ALGO_EQUAL_RATIO,
    ALGO_RHC_UPPER,
    ALGO_RHC_LOWER,
    ALGO_RHC_MID,
)

_RATIO_ALGOS = frozenset({ALGO_FIXED, ALGO_ANYTIME, ALGO_ANYTIME_DEPLETE})


def _clock_minutes(text: str) -> int:
    parts = text.split(":")
    if len(parts) != 2:
        raise ValueError(f"clock time must look like HH:MM, got {text!r}")
    hours, minutes = int(parts[0]), int(parts[1])
    if not (0 <= hours < 24 and 0 <= minutes < 60):
        raise ValueError(f"clock time out of range: {text!r}")
    return 60 * hours + minutes


def _clock_string(total_minutes: int) -> str:
    return f"{total_minutes // 60:02d}:{total_minutes % 60:02d}"


@dataclass(frozen=True)
class TraceTransaction:
    """One charging session, assumed to draw constant power for its duration."""

    start: datetime
    duration_min: float
    energy_kwh: float

    def __post_init__(self):
        if not (math.isfinite(self.duration_min) and self.duration_min > 0):
            raise MalformedRecord(f"duration_min must be > 0, got {self.duration_min}")
        if not (math.isfinite(self.energy_kwh) and self.energy_kwh >= 0):
            raise MalformedRecord(f"energy_kwh must be >= 0, got {self.energy_kwh}")


@dataclass(frozen=True)
class SlottingConfig:
    """How raw transactions become per-day on-peak demand profiles.

    The on-peak window [on_peak_start, on_peak_end) of every calendar day is
    cut into slot_minutes slots. scale_factor multiplies every slot value
    after attribution and is always explicit, never inferred from the data.
    demand_bounds, when given, override the empirical min/max of the kept
    slot values. The default window spans five hours, i.e. 20 slots of 15
    minutes.
    """

    slot_minutes: int = 15
    on_peak_start: str = "12:00"
    on_peak_end: str = "17:00"
    scale_factor: float = 1.0
    demand_bounds: tuple[float, float] | None = None

    def __post_init__(self):
        if int(self.slot_minutes) != self.slot_minutes or self.slot_minutes < 1:
            raise ValueError(f"slot_minutes must be a positive integer, got {self.slot_minutes}")
        span = _clock_minutes(self.on_peak_end) - _clock_minutes(self.on_peak_start)
        if span <= 0:
            raise ValueError("on-peak window must end after it starts")
        if span % self.slot_minutes:
            raise ValueError(
                f"window of {span} min does not divide into {self.slot_minutes}-min slots"
            )
        if not (math.isfinite(self.scale_factor) and self.scale_factor > 0):
            raise ValueError(f"scale_factor must be > 0, got {self.scale_factor}")
        if self.demand_bounds is not None:
            lb, ub = self.demand_bounds
            if not (0 < lb <= ub):
                raise ValueError(f"demand_bounds must satisfy 0 < lb <= ub, got {self.demand_bounds}")

    @property
    def horizon(self) -> int:
        span = _clock_minutes(self.on_peak_end) - _clock_minutes(self.on_peak_start)
        return span // self.slot_minutes


def parse_transactions(lines) -> tuple[TraceTransaction, ...]:
    """Parse CSV rows "start_iso8601,duration_min,energy_kwh".

    The header row is required. Blank lines and lines starting with "#" are
    skipped. Field-level problems raise MalformedRecord with the offending
    line number; a file with a header but no data rows raises EmptyTrace.
    """
    if isinstance(lines, str):
        lines = lines.splitlines()
    rows: list[TraceTransaction] = []
    saw_header = False
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        cells = [c.strip() for c in text.split(",")]
        if not saw_header:
            if tuple(c.lower() for c in cells) != TRACE_HEADER:
                raise MalformedRecord(
                    f"line {lineno}: expected header {','.join(TRACE_HEADER)}, got {text!r}"
                )
            saw_header = True
            continue
        if len(cells) != 3:
            raise MalformedRecord(f"line {lineno}: expected 3 fields, got {len(cells)}")
        try:
            txn = TraceTransaction(
                start=datetime.fromisoformat(cells[0]),
                duration_min=float(cells[1]),
                energy_kwh=float(cells[2]),
            )
        except MalformedRecord as exc:
            raise MalformedRecord(f"line {lineno}: {exc}") from None
        except ValueError as exc:
            raise MalformedRecord(f"line {lineno}: {exc}") from None
        rows.append(txn)
    if not saw_header:
        raise MalformedRecord("empty input: the header row is required")
    if not rows:
        raise EmptyTrace("no transactions after the header")
    return tuple(rows)


def load_transactions(path) -> tuple[TraceTransaction, ...]:
    with open(path, encoding="utf-8") as fh:
        return parse_transactions(fh)


@dataclass(frozen=True)
class DayProfileSet:
    """Per-day on-peak demand profiles plus the bounds that envelop them.

    day_keys are ISO dates in chronological order; day_values rows all share
    one horizon. avg_daily_energy is the mean of the per-day totals and is
    the natural yardstick for storage capacity ("a 30% capacity rate" means
    c = 0.3 * avg_daily_energy).
    """

    day_keys: tuple[str, ...]
    day_values: tuple[tuple[float, ...], ...]
    slot_minutes: int
    on_peak_start: str
    on_peak_end: str
    scale_factor: float
    demand_lb: float
    demand_ub: float
    avg_daily_energy: float

    def __post_init__(self):
        keys = tuple(str(k) for k in self.day_keys)
        rows = tuple(tuple(float(x) for x in row) for row in self.day_values)
        object.__setattr__(self, "day_keys", keys)
        object.__setattr__(self, "day_values", rows)
        if not rows:
            raise ValueError("at least one day is required")
        if len(keys) != len(rows):
            raise ValueError(f"{len(keys)} day keys for {len(rows)} day rows")
        width = len(rows[0])
        if width < 1 or any(len(r) != width for r in rows):
            raise ValueError("day rows must share one positive horizon")
        if not (0 < self.demand_lb <= self.demand_ub):
            raise ValueError(f"bounds must satisfy 0 < lb <= ub, got ({self.demand_lb}, {self.demand_ub})")
        values = np.asarray(rows, dtype=float)
        tol = 1e-9 * max(1.0, self.demand_ub)
        if values.min() < self.demand_lb - tol or values.max() > self.demand_ub + tol:
            raise ValueError(
                f"profile values [{values.min()}, {values.max()}] escape the bounds "
                f"[{self.demand_lb}, {self.demand_ub}]"
            )
        mean_energy = float(values.sum(axis=1).mean())
        if self.avg_daily_energy <= 0:
            raise ValueError(f"avg_daily_energy must be > 0, got {self.avg_daily_energy}")
        if abs(mean_energy - self.avg_daily_energy) > 1e-6 * max(1.0, mean_energy):
            raise ValueError(
                f"avg_daily_energy {self.avg_daily_energy} disagrees with the "
                f"profile mean {mean_energy}"
            )

    @property
    def horizon(self) -> int:
        return len(self.day_values[0])

    @property
    def num_days(self) -> int:
        return len(self.day_values)

    def values(self) -> np.ndarray:
        return np.asarray(self.day_values, dtype=float)

    def instance(self, capacity_c: float, rate_limit: float | None = None) -> Instance:
        return validate_instance(
            capacity_c, rate_limit, self.horizon, self.demand_lb, self.demand_ub
        )

    def monthly_groups(self) -> dict[str, tuple[int, ...]]:
        """Map "YYYY-MM" to the row indices of that month, in file order."""
        groups: dict[str, list[int]] = {}
        for idx, key in enumerate(self.day_keys):
            day = date.fromisoformat(key)
            groups.setdefault(f"{day.year:04d}-{day.month:02d}", []).append(idx)
        return {month: tuple(ixs) for month, ixs in groups.items()}


def profile_set_to_json(profiles: DayProfileSet) -> str:
    payload = {
        "day_keys": list(profiles.day_keys),
        "day_values": [list(row) for row in profiles.day_values],
        "slot_minutes": profiles.slot_minutes,
        "on_peak_start": profiles.on_peak_start,
        "on_peak_end": profiles.on_peak_end,
        "scale_factor": profiles.scale_factor,
        "demand_lb": profiles.demand_lb,
        "demand_ub": profiles.demand_ub,
        "avg_daily_energy": profiles.avg_daily_energy,
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def profile_set_from_json(text: str) -> DayProfileSet:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(f"profile set is not valid JSON: {exc}") from None
    if not isinstance(payload, dict):
        raise MalformedRecord("profile set JSON must be an object")
    required = (
        "day_keys", "day_values", "slot_minutes", "on_peak_start",
        "on_peak_end", "scale_factor", "demand_lb", "demand_ub",
        "avg_daily_energy",
    )
    missing = [k for k in required if k not in payload]
    if missing:
        raise MalformedRecord(f"profile set JSON missing keys: {', '.join(missing)}")
    try:
        return DayProfileSet(
            day_keys=tuple(payload["day_keys"]),
            day_values=tuple(tuple(row) for row in payload["day_values"]),
            slot_minutes=int(payload["slot_minutes"]),
            on_peak_start=str(payload["on_peak_start"]),
            on_peak_end=str(payload["on_peak_end"]),
            scale_factor=float(payload["scale_factor"]),
            demand_lb=float(payload["demand_lb"]),
            demand_ub=float(payload["demand_ub"]),
            avg_daily_energy=float(payload["avg_daily_energy"]),
        )
    except (TypeError, ValueError) as exc:
        raise MalformedRecord(f"profile set JSON rejected: {exc}") from None


def save_profile_set(profiles: DayProfileSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(profile_set_to_json(profiles))
        fh.write("\n")


def load_profile_set(path) -> DayProfileSet:
    with open(path, encoding="utf-8") as fh:
        return profile_set_from_json(fh.read())


def ingest_trace(transactions, config: SlottingConfig | None = None) -> DayProfileSet:
    """Slot transactions into per-day on-peak profiles at constant power.

    Each transaction's energy spreads over the slots it overlaps in
    proportion to the overlapped minutes, so the attributed energy inside
    the windows is conserved exactly. Days where some on-peak slot never
    receives energy are incomplete; they are dropped and logged rather than
    passed on as artificial zero demand.
    """
    if config is None:
        config = SlottingConfig()
    transactions = tuple(transactions)
    if not transactions:
        raise EmptyTrace("no transactions to ingest")
    horizon = config.horizon
    open_min = _clock_minutes(config.on_peak_start)
    window_open_time = time(hour=open_min // 60, minute=open_min % 60)
    slot = timedelta(minutes=config.slot_minutes)

    buckets: dict[date, np.ndarray] = {}
    for txn in transactions:
        t0 = txn.start
        t1 = t0 + timedelta(minutes=txn.duration_min)
        day = t0.date()
        while day <= t1.date():
            window_open = datetime.combine(day, window_open_time)
            for k in range(horizon):
                s0 = window_open + k * slot
                s1 = s0 + slot
                overlap = (min(t1, s1) - max(t0, s0)).total_seconds() / 60.0
                if overlap > 0:
                    row = buckets.setdefault(day, np.zeros(horizon))
                    row[k] += txn.energy_kwh * overlap / txn.duration_min
            day = day + timedelta(days=1)

    kept_keys: list[str] = []
    kept_rows: list[np.ndarray] = []
    dropped: list[str] = []
    for day in sorted(buckets):
        row = buckets[day] * config.scale_factor
        if (row <= 0).any():
            dropped.append(day.isoformat())
            continue
        kept_keys.append(day.isoformat())
        kept_rows.append(row)
    if dropped:
        logger.info(
            "dropped %d day(s) with incomplete on-peak coverage: %s",
            len(dropped), ", ".join(dropped),
        )
    if not kept_rows:
        raise EmptyTrace("no day fully covers the on-peak window")

    values = np.asarray(kept_rows)
    if config.demand_bounds is None:
        lb, ub = float(values.min()), float(values.max())
    else:
        lb, ub = config.demand_bounds
    return DayProfileSet(
        day_keys=tuple(kept_keys),
        day_values=tuple(tuple(float(x) for x in row) for row in kept_rows),
        slot_minutes=config.slot_minutes,
        on_peak_start=config.on_peak_start,
        on_peak_end=config.on_peak_end,
        scale_factor=config.scale_factor,
        demand_lb=lb,
        demand_ub=ub,
        avg_daily_energy=float(values.sum(axis=1).mean()),
    )


def _wrap_synthetic(
    values: np.ndarray, demand_lb: float, demand_ub: float,
    start_date: str, slot_minutes: int,
) -> DayProfileSet:
    num_days, horizon = values.shape
    open_min = _clock_minutes("12:00")
    if open_min + horizon * slot_minutes > 24 * 60:
        raise ValueError(f"{horizon} slots of {slot_minutes} min do not fit the day")
    first = date.fromisoformat(start_date)
    keys = tuple((first + timedelta(days=i)).isoformat() for i in range(num_days))
    return DayProfileSet(
        day_keys=keys,
        day_values=tuple(tuple(float(x) for x in row) for row in values),
        slot_minutes=slot_minutes,
        on_peak_start="12:00",
        on_peak_end=_clock_string(open_min + horizon * slot_minutes),
        scale_factor=1.0,
        demand_lb=demand_lb,
        demand_ub=demand_ub,
        avg_daily_energy=float(values.sum(axis=1).mean()),
    )


def synthetic_uniform_profiles(
    num_days: int, horizon: int, demand_lb: float, demand_ub: float,
    seed: int, start_date: str = "2024-03-01", slot_minutes: int = 15,
) -> DayProfileSet:
    """Days of independent uniform draws over [demand_lb, demand_ub]."""
    if num_days < 1 or horizon < 1:
        raise ValueError("num_days and horizon must be positive")
    if not (0 < demand_lb <= demand_ub):
        raise ValueError(f"bounds must satisfy 0 < lb <= ub, got ({demand_lb}, {demand_ub})")
    rng = np.random.default_rng(seed)
    values = rng.uniform(demand_lb, demand_ub, size=(num_days, horizon))
    return _wrap_synthetic(values, demand_lb, demand_ub, start_date, slot_minutes)


def synthetic_volatile_profiles(
    num_days: int, horizon: int, demand_lb: float, demand_ub: float,
    seed: int, calm_share: float = 0.55, surge_share: float = 0.225,
    start_date: str = "2024-03-01", slot_minutes: int = 15,
) -> DayProfileSet:
    """Volatile days: a rising base load punctuated by late demand surges.

    Every day carries a gently rising base (sites fill toward the evening):
    the floor plus noise in the lowest eighth of the range plus a ramp
    reaching about a third of the range by the final slot. A calm_share of
    days stay that way. Of the rest, half take a one-slot moderate surge
    (55-70% of the range) somewhere in the back half of the window, and half
    take a two-slot surge near the ceiling there. The mixture is deliberately
    hostile to any single fixed rule: moderate surges sit above in-band
    purchase thresholds, ceiling surges drain threshold rules into buying the
    tail raw, the rising base punishes policies that spend early, and the
    surge heights spread out enough that no constant discharge matches them.
    """
    if num_days < 1 or horizon < 1:
        raise ValueError("num_days and horizon must be positive")
    if not (0 < demand_lb <= demand_ub):
        raise ValueError(f"bounds must satisfy 0 < lb <= ub, got ({demand_lb}, {demand_ub})")
    if not (0 <= calm_share <= 1 and 0 <= surge_share and calm_share + surge_share <= 1):
        raise ValueError(
            f"shares must be nonnegative with calm_share + surge_share <= 1, "
            f"got ({calm_share}, {surge_share})"
        )
    rng = np.random.default_rng(seed)
    span = demand_ub - demand_lb
    late_start = horizon - max(1, horizon // 2)
    days = np.empty((num_days, horizon))
    for i in range(num_days):
        ramp = (np.linspace(0.0, 0.35 * span, horizon) if horizon > 1 else np.zeros(1))
        ramp = ramp * rng.uniform(0.7, 1.3)
        day = np.clip(
            demand_lb + rng.uniform(0.0, 0.12 * span, horizon) + ramp,
            demand_lb, demand_ub,
        )
        kind = rng.random()
        if kind >= calm_share:
            if kind < calm_share + surge_share:
                level = demand_lb + rng.uniform(0.55, 0.70) * span
                slot = int(rng.integers(late_start, horizon))
                day[slot] = min(level, demand_ub)
            else:
                level = rng.uniform(demand_ub - 0.10 * span, demand_ub)
                width = 2 if horizon - late_start >= 2 else 1
                slot = int(rng.integers(late_start, horizon - width + 1))
                surge = level + rng.uniform(-0.02, 0.02, width) * span
                day[slot:slot + width] = np.clip(surge, demand_lb, demand_ub)
        days[i] = day
    return _wrap_synthetic(days, demand_lb, demand_ub, start_date, slot_minutes)


@dataclass(frozen=True)
class AggregateMetrics:
    """Matched per-day peaks for one policy, with the derived aggregates.

    usage rates divide the net (after-discharge) peak by the original peak
    demand of the same day; the performance ratio divides the summed net
    peaks by the summed offline-optimal peaks. Both are checked here: usage
    must land in (0, 1] and the ratio can never drop below 1, because no
    schedule beats the offline optimum.
    """

    final_peaks: tuple[float, ...]
    offline_peaks: tuple[float, ...]
    original_peaks: tuple[float, ...]

    def __post_init__(self):
        finals = tuple(float(x) for x in self.final_peaks)
        offline = tuple(float(x) for x in self.offline_peaks)
        original = tuple(float(x) for x in self.original_peaks)
        object.__setattr__(self, "final_peaks", finals)
        object.__setattr__(self, "offline_peaks", offline)
        object.__setattr__(self, "original_peaks", original)
        if not (len(finals) == len(offline) == len(original)):
            raise MismatchedLengths(
                f"{len(finals)} final peaks, {len(offline)} offline peaks, "
                f"{len(original)} original peaks"
            )
        if not finals:
            raise MismatchedLengths("at least one day is required")
        if min(original) <= 0 or min(offline) <= 0:
            raise ValueError("peaks must be positive")
        for rate in self.usage_rates:
            if not (0 < rate <= 1 + 1e-9):
                raise ValueError(f"peak usage rate {rate} escapes (0, 1]")
        if self.performance_ratio < 1 - 1e-9:
            raise ValueError(
                f"performance ratio {self.performance_ratio} < 1: online beat offline"
            )

    @property
    def usage_rates(self) -> tuple[float, ...]:
        return tuple(f / o for f, o in zip(self.final_peaks, self.original_peaks))

    @property
    def day_ratios(self) -> tuple[float, ...]:
        return tuple(f / o for f, o in zip(self.final_peaks, self.offline_peaks))

    @property
    def performance_ratio(self) -> float:
        return sum(self.final_peaks) / sum(self.offline_peaks)

    @property
    def mean_final_peak(self) -> float:
        return float(np.mean(self.final_peaks))

    @property
    def std_final_peak(self) -> float:
        return float(np.std(self.final_peaks))

    @property
    def mean_usage_rate(self) -> float:
        return float(np.mean(self.usage_rates))


def compute_metrics(online_peaks, offline_peaks, original_peaks) -> AggregateMetrics:
    """Bundle matched per-day peak lists; lengths must agree.

    online_peaks generally come from PolicyRun.final_peak, offline_peaks
    from OfflineSolution.peak, original_peaks are the raw per-day maxima.
    """
    return AggregateMetrics(
        final_peaks=tuple(online_peaks),
        offline_peaks=tuple(offline_peaks),
        original_peaks=tuple(original_peaks),
    )


@dataclass(frozen=True)
class SweepCell:
    axis: str
    value: float
    algorithm: str
    metrics: AggregateMetrics


@dataclass(frozen=True)
class MonthlyComparison:
    """Monthly peak with the standing-peak threading on and off."""

    month: str
    capacity_rate: float
    independent_peak: float
    threaded_peak: float

    @property
    def extra_reduction_pct(self) -> float:
        return 100.0 * (self.independent_peak - self.threaded_peak) / self.independent_peak


@dataclass(frozen=True)
class ExperimentReport:
    """Everything run_experiment measured, plus the rendering helpers."""

    horizon: int
    day_keys: tuple[str, ...]
    demand_lb: float
    demand_ub: float
    avg_daily_energy: float
    cells: tuple[SweepCell, ...]
    monthly: tuple[MonthlyComparison, ...] = ()

    def cell(self, algorithm: str, value: float) -> SweepCell:
        for cell in self.cells:
            if cell.algorithm == algorithm and abs(cell.value - value) <= 1e-12:
                return cell
        raise KeyError(f"no cell for algorithm={algorithm!r} value={value}")

    def render_text(self) -> str:
        lines = [
            f"days={len(self.day_keys)} horizon={self.horizon} "
            f"demand_bounds=[{self.demand_lb:.6f},{self.demand_ub:.6f}] "
            f"avg_daily_energy={self.avg_daily_energy:.6f}",
            "",
            "capacity_rate,algorithm,mean_final_peak,std_final_peak,"
            "mean_usage_rate,performance_ratio",
        ]
        for cell in self.cells:
            m = cell.metrics
            lines.append(
                f"{cell.value:.6f},{cell.algorithm},{m.mean_final_peak:.6f},"
                f"{m.std_final_peak:.6f},{m.mean_usage_rate:.6f},{m.performance_ratio:.6f}"
            )
        if self.monthly:
            lines.append("")
            lines.append(
                "month,capacity_rate,independent_peak,threaded_peak,extra_reduction_pct"
            )
            for row in self.monthly:
                lines.append(
                    f"{row.month},{row.capacity_rate:.6f},{row.independent_peak:.6f},"
                    f"{row.threaded_peak:.6f},{row.extra_reduction_pct:.6f}"
                )
        return "\n".join(lines) + "\n"

    def series_lines(self) -> list[str]:
        """Plot-ready rows: one line per (axis value, series) pair."""
        lines = ["axis_value,series,mean,stddev"]
        for cell in self.cells:
            m = cell.metrics
            lines.append(
                f"{cell.value:.6f},{cell.algorithm},{m.mean_final_peak:.6f},{m.std_final_peak:.6f}"
            )
        return lines


@dataclass(frozen=True)
class ExperimentConfig:
    """Experiment grid: a policy roster crossed with capacity rates.

    Capacity rates are fractions of the day set's average daily energy.
    rate_limit_fraction, when given, caps the per-slot discharge at that
    fraction of demand_ub. monthly=True additionally threads the standing
    monthly peak through the anytime policy, month by month.
    """

    profiles: DayProfileSet
    algorithms: tuple[str, ...] = (ALGO_FIXED, ALGO_ANYTIME, ALGO_ANYTIME_DEPLETE)
    capacity_rates: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5)
    rate_limit_fraction: float | None = None
    monthly: bool = False
    epsilon: float = 1e-4
    rhc_window: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(self, "capacity_rates", tuple(float(r) for r in self.capacity_rates))
        unknown = [a for a in self.algorithms if a not in ALL_ALGORITHMS]
        if unknown:
            raise UnknownAlgorithm(
                f"{', '.join(unknown)} (choose from {', '.join(ALL_ALGORITHMS)})"
            )
        if not self.algorithms:
            raise ValueError("at least one algorithm is required")
        if not self.capacity_rates or min(self.capacity_rates) <= 0:
            raise ValueError("capacity_rates must be positive")
        if self.rate_limit_fraction is not None and self.rate_limit_fraction <= 0:
            raise ValueError("rate_limit_fraction must be > 0 when present")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


def _day_runs(
    algorithm: str, instance: Instance, profiles, offline_peaks,
    pi_star: float | None, thr_calibration: float, config: ExperimentConfig,
) -> list[float]:
    """Final (after-discharge) peak of the given policy on every day."""
    if algorithm == ALGO_OFFLINE:
        return list(offline_peaks)
    finals = []
    mid = 0.5 * (instance.demand_lb + instance.demand_ub)
    rate = instance.capacity_c / config.profiles.avg_daily_energy
    for prof in profiles:
        if algorithm == ALGO_FIXED:
            run = run_pcr_pmd(instance, pi_star, prof)
        elif algorithm == ALGO_ANYTIME:
            run = run_anytime(instance, prof, PolicyOptions(
                mode=MODE_ANYTIME, initial_ratio=pi_star,
                bisection_epsilon=config.epsilon,
            ))
        elif algorithm == ALGO_ANYTIME_DEPLETE:
            run = run_anytime(instance, prof, PolicyOptions(
                mode=MODE_ANYTIME_DEPLETING, initial_ratio=pi_star,
                bisection_epsilon=config.epsilon,
            ))
        elif algorithm == ALGO_THR_OFFLINE_MEAN:
            run = run_threshold(instance, prof, thr_calibration)
        elif algorithm == ALGO_THR_MID:
            run = run_threshold(instance, prof, mid)
        elif algorithm == ALGO_EQUAL_DISCHARGE:
            run = run_equal_discharge(instance, prof)
        elif algorithm == ALGO_EQUAL_RATIO:
            run = run_equal_ratio(instance, prof, min(1.0, rate))
        elif algorithm == ALGO_RHC_UPPER:
            run = run_rhc(instance, prof, RhcConfig(config.rhc_window, FUTURE_UPPER))
        elif algorithm == ALGO_RHC_LOWER:
            run = run_rhc(instance, prof, RhcConfig(config.rhc_window, FUTURE_LOWER))
        elif algorithm == ALGO_RHC_MID:
            run = run_rhc(instance, prof, RhcConfig(config.rhc_window, FUTURE_MIDPOINT))
        else:
            raise UnknownAlgorithm(algorithm)
        finals.append(run.final_peak)
    return finals


def _threaded_month_peak(
    instance: Instance, day_profiles, pi_star: float, epsilon: float
) -> float:
    """Monthly peak when each day's run knows the month's standing peak.

    Only the plain anytime policy is threaded: the depleting variant
    deliberately dumps leftover inventory at the end of a day, which can
    push a slot below the standing monthly peak and would waste storage
    under monthly billing.
    """
    d_op = 0.0
    for prof in day_profiles:
        run = run_anytime(instance, prof, PolicyOptions(
            mode=MODE_ANYTIME, monthly_peak=d_op,
            initial_ratio=pi_star, bisection_epsilon=epsilon,
        ))
        net = prof.values - run.schedule.values
        for k in range(len(net)):
            # a discharging slot must never land below the standing peak
            assert run.schedule.values[k] <= 1e-9 or net[k] >= d_op - 1e-6, (
                f"slot {k + 1} discharged below the monthly peak "
                f"{d_op}: net {net[k]}"
            )
        d_op = max(d_op, run.final_peak)
    return d_op


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Replay the roster over every day for every capacity rate.

    Per rate: build the instance (c = rate * avg daily energy), solve the
    offline optimum day by day, compute the optimal competitive ratio once
    if any ratio-pursuit policy needs it, then collect each policy's peaks
    into one SweepCell. With monthly=True the anytime policy additionally
    runs once per month with the standing peak threaded through, paired
    against the independent per-day runs of the same policy.
    """
    ps = config.profiles
    raw = ps.values()
    original_peaks = [float(x) for x in raw.max(axis=1)]
    rate_limit = (
        None if config.rate_limit_fraction is None
        else config.rate_limit_fraction * ps.demand_ub
    )
    needs_pi = config.monthly or any(a in _RATIO_ALGOS for a in config.algorithms)

    cells: list[SweepCell] = []
    monthly_rows: list[MonthlyComparison] = []
    for rate in config.capacity_rates:
        instance = ps.instance(rate * ps.avg_daily_energy, rate_limit)
        profiles = [DemandProfile(instance, row) for row in raw]
        offline_peaks = [solve_offline_pmd(instance, p).peak for p in profiles]
        thr_calibration = float(np.mean(offline_peaks))
        pi_star = optimal_cr(instance).pi_star if needs_pi else None
        for algorithm in config.algorithms:
            finals = _day_runs(
                algorithm, instance, profiles, offline_peaks,
                pi_star, thr_calibration, config,
            )
            cells.append(SweepCell(
                axis="capacity_rate", value=rate, algorithm=algorithm,
                metrics=compute_metrics(finals, offline_peaks, original_peaks),
            ))
        if config.monthly:
            independent = _day_runs(
                ALGO_ANYTIME, instance, profiles, offline_peaks,
                pi_star, thr_calibration, config,
            )
            for month, idxs in ps.monthly_groups().items():
                threaded = _threaded_month_peak(
                    instance, [profiles[i] for i in idxs], pi_star, config.epsilon
                )
                monthly_rows.append(MonthlyComparison(
                    month=month, capacity_rate=rate,
                    independent_peak=max(independent[i] for i in idxs),
                    threaded_peak=threaded,
                ))
    return ExperimentReport(
        horizon=ps.horizon,
        day_keys=ps.day_keys,
        demand_lb=ps.demand_lb,
        demand_ub=ps.demand_ub,
        avg_daily_energy=ps.avg_daily_energy,
        cells=tuple(cells),
        monthly=tuple(monthly_rows),
    )
