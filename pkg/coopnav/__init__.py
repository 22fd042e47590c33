"""
.. include:: ../README.md
"""

from coopnav.config import InvalidConfigError, RunConfig, load_run_config, parse_run_config
from coopnav.deadreck import (
    Correction,
    LocalTracker,
    SequencingError,
    TrackState,
    apply_correction,
    dr_propagate,
)
from coopnav.fusion import (
    AuxKind,
    ConstraintMethod,
    ConstraintParams,
    FusionCenter,
    FusionMode,
    GlobalEstimate,
    RangeMeasurement,
    RangeParams,
    UnknownFootError,
    aux_update,
    build_transform,
    constraint_update,
    ingest_step_update,
    marginal_condition,
    range_update,
)
from coopnav.ins import (
    ImuSample,
    NavState,
    StepUpdate,
    mechanize,
    run_step_wise_ins,
    step_segment,
    zupt_detect,
    zupt_update,
)
from coopnav.linalg import DegenerateCovarianceError
from coopnav.messaging import CommAudit, NetworkConfig, SimNetwork, audit_report
from coopnav.scenarios import (
    MetricsReport,
    ScenarioConfig,
    ScenarioKind,
    run_monte_carlo,
    run_scenario,
)
from coopnav.selfcheck import SelfCheckFailure, run_selfcheck
from coopnav.validation import InvalidInputError

__all__ = [
    "AuxKind",
    "CommAudit",
    "ConstraintMethod",
    "ConstraintParams",
    "Correction",
    "DegenerateCovarianceError",
    "FusionCenter",
    "FusionMode",
    "GlobalEstimate",
    "ImuSample",
    "InvalidConfigError",
    "InvalidInputError",
    "LocalTracker",
    "MetricsReport",
    "NavState",
    "NetworkConfig",
    "RangeMeasurement",
    "RangeParams",
    "RunConfig",
    "ScenarioConfig",
    "ScenarioKind",
    "SelfCheckFailure",
    "SequencingError",
    "SimNetwork",
    "StepUpdate",
    "TrackState",
    "UnknownFootError",
    "apply_correction",
    "audit_report",
    "aux_update",
    "build_transform",
    "constraint_update",
    "dr_propagate",
    "ingest_step_update",
    "load_run_config",
    "marginal_condition",
    "mechanize",
    "parse_run_config",
    "range_update",
    "run_monte_carlo",
    "run_scenario",
    "run_selfcheck",
    "run_step_wise_ins",
    "step_segment",
    "zupt_detect",
    "zupt_update",
]
