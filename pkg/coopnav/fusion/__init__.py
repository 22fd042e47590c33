from coopnav.fusion.center import (
    FusionCenter,
    FusionMode,
    FusionStats,
    ingest_step_update,
    propagate_foot,
)
from coopnav.fusion.constraint import (
    constraint_update,
    project_to_ball,
    sigma_points,
    truncated_moments,
)
from coopnav.fusion.estimate import (
    ConstraintMethod,
    ConstraintParams,
    GlobalEstimate,
    InvalidParamsError,
    Lattice,
    RangeMeasurement,
    RangeParams,
    UnknownFootError,
    build_lattice,
)
from coopnav.fusion.marginalization import marginal_condition
from coopnav.fusion.ranging import (
    AuxKind,
    InfluencePoint,
    aux_update,
    cauchy_uniform_likelihood,
    influence_curve,
    lattice_condition,
    range_update,
)
from coopnav.fusion.transforms import PairTransform, TransformKind, build_transform

__all__ = [
    "AuxKind",
    "ConstraintMethod",
    "ConstraintParams",
    "FusionCenter",
    "FusionMode",
    "FusionStats",
    "GlobalEstimate",
    "InfluencePoint",
    "InvalidParamsError",
    "Lattice",
    "PairTransform",
    "RangeMeasurement",
    "RangeParams",
    "TransformKind",
    "UnknownFootError",
    "aux_update",
    "build_lattice",
    "build_transform",
    "cauchy_uniform_likelihood",
    "constraint_update",
    "influence_curve",
    "ingest_step_update",
    "lattice_condition",
    "marginal_condition",
    "project_to_ball",
    "propagate_foot",
    "range_update",
    "sigma_points",
    "truncated_moments",
]
