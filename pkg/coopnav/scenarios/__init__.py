from coopnav.scenarios.config import MonteCarloConfig, ScenarioConfig, ScenarioKind
from coopnav.scenarios.consistency import (
    ConsistencyReport,
    ConsistencyRow,
    consistency_check,
)
from coopnav.scenarios.engine import RunResult, ScenarioRun, TrajectoryRow, run_scenario
from coopnav.scenarios.gait import GaitParams, GaitTruth, synth_imu_gait
from coopnav.scenarios.metrics import (
    FailedRun,
    InverseSqrtFit,
    MetricsReport,
    build_report,
    correlation_curve,
    fit_inverse_sqrt,
    relative_rmse_curve,
    rmse_curve,
    trend_slope,
)
from coopnav.scenarios.montecarlo import run_agents_sweep, run_monte_carlo
from coopnav.scenarios.synth import synth_ranges, synth_step_updates, true_increments
from coopnav.scenarios.truth import FootTruth, TruthTrace, foot_ids, generate_truth

__all__ = [
    "ConsistencyReport",
    "ConsistencyRow",
    "FailedRun",
    "FootTruth",
    "GaitParams",
    "GaitTruth",
    "InverseSqrtFit",
    "MetricsReport",
    "MonteCarloConfig",
    "RunResult",
    "ScenarioConfig",
    "ScenarioKind",
    "ScenarioRun",
    "TrajectoryRow",
    "TruthTrace",
    "build_report",
    "consistency_check",
    "correlation_curve",
    "fit_inverse_sqrt",
    "foot_ids",
    "generate_truth",
    "relative_rmse_curve",
    "rmse_curve",
    "run_agents_sweep",
    "run_monte_carlo",
    "run_scenario",
    "synth_imu_gait",
    "synth_ranges",
    "synth_step_updates",
    "trend_slope",
    "true_increments",
]
