"""Optimal competitive online algorithms for peak-demand minimization.

A storage system with total inventory c and optional per-slot discharge cap
serves a T-slot demand sequence revealed online inside known bounds. The
package provides the closed-form offline optimum, the optimal competitive
ratio via linear-fractional programs, ratio-pursuit online policies (fixed,
anytime-optimal, inventory-depleting, monthly-threaded), threshold and
receding-horizon baselines, and a trace-driven experiment harness.
"""

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
from .core import (
    DemandProfile,
    DischargeSchedule,
    Instance,
    OnlineState,
    reference_profile,
    reference_values,
    validate_instance,
)
from .cr import (
    CrResult,
    build_cr_compute,
    optimal_cr,
    phi_bruteforce,
    phi_bruteforce_witness,
    ratio_lower_bound,
    solve_cr_compute,
)
from .errors import (
    BudgetExceedsTotalDemand,
    CapacityExceedsMinDemand,
    DegenerateInstance,
    DegenerateOfflinePeak,
    DemandOutOfBounds,
    DenominatorNotPositive,
    EmptyIndexSet,
    EmptyTrace,
    HorizonTooLarge,
    InfeasibleSchedule,
    InvalidCmdWeights,
    InvalidIndexSet,
    InvertedBounds,
    MalformedRecord,
    MismatchedLengths,
    NegativeSlack,
    NonPositiveBound,
    NumericalFailure,
    PeakMinError,
    PrefixOutOfBounds,
    UnknownAlgorithm,
    ZeroHorizon,
)
from .harness import (
    AggregateMetrics,
    DayProfileSet,
    ExperimentConfig,
    ExperimentReport,
    SlottingConfig,
    TraceTransaction,
    compute_metrics,
    ingest_trace,
    load_profile_set,
    load_transactions,
    parse_transactions,
    run_experiment,
    save_profile_set,
    synthetic_uniform_profiles,
    synthetic_volatile_profiles,
)
from .lp import LfpProblem, LfpResult, LinearProgram, LpResult, solve_lfp, solve_lp
from .offline import (
    CmdWeights,
    OfflineSolution,
    evaluate_cmd_cost,
    offline_peak,
    solve_offline_pmd,
    water_fill_threshold,
)
from .online import (
    MODE_ANYTIME,
    MODE_ANYTIME_DEPLETING,
    MODE_FIXED,
    PolicyOptions,
    PolicyRun,
    anytime_ratio,
    build_aocr_thr,
    depleting_amount,
    pcr_step,
    run_anytime,
    run_pcr_pmd,
)

__version__ = "1.0.0"

__all__ = [
    "AggregateMetrics",
    "BudgetExceedsTotalDemand",
    "CapacityExceedsMinDemand",
    "CmdWeights",
    "CrResult",
    "DayProfileSet",
    "DegenerateInstance",
    "DegenerateOfflinePeak",
    "DemandOutOfBounds",
    "DemandProfile",
    "DenominatorNotPositive",
    "DischargeSchedule",
    "EmptyIndexSet",
    "EmptyTrace",
    "ExperimentConfig",
    "ExperimentReport",
    "FUTURE_LOWER",
    "FUTURE_MIDPOINT",
    "FUTURE_UPPER",
    "HorizonTooLarge",
    "InfeasibleSchedule",
    "Instance",
    "InvalidCmdWeights",
    "InvalidIndexSet",
    "InvertedBounds",
    "LfpProblem",
    "LfpResult",
    "LinearProgram",
    "LpResult",
    "MODE_ANYTIME",
    "MODE_ANYTIME_DEPLETING",
    "MODE_FIXED",
    "MalformedRecord",
    "MismatchedLengths",
    "NegativeSlack",
    "NonPositiveBound",
    "NumericalFailure",
    "OfflineSolution",
    "OnlineState",
    "PeakMinError",
    "PolicyOptions",
    "PolicyRun",
    "PrefixOutOfBounds",
    "RhcConfig",
    "SlottingConfig",
    "TraceTransaction",
    "UnknownAlgorithm",
    "ZeroHorizon",
    "anytime_ratio",
    "build_aocr_thr",
    "build_cr_compute",
    "compute_metrics",
    "depleting_amount",
    "evaluate_cmd_cost",
    "ingest_trace",
    "load_profile_set",
    "load_transactions",
    "offline_peak",
    "optimal_cr",
    "parse_transactions",
    "pcr_step",
    "phi_bruteforce",
    "phi_bruteforce_witness",
    "ratio_lower_bound",
    "reference_profile",
    "reference_values",
    "run_anytime",
    "run_equal_discharge",
    "run_equal_ratio",
    "run_experiment",
    "run_pcr_pmd",
    "run_rhc",
    "run_threshold",
    "save_profile_set",
    "solve_cr_compute",
    "solve_lfp",
    "solve_lp",
    "solve_offline_pmd",
    "synthetic_uniform_profiles",
    "synthetic_volatile_profiles",
    "validate_instance",
    "water_fill_threshold",
]
