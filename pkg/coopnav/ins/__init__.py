from coopnav.ins.detector import (
    Detection,
    DetectorConfig,
    calibrate_threshold,
    glrt_statistic,
    zupt_detect,
)
from coopnav.ins.navigation import (
    GRAVITY,
    ImuNoise,
    ImuSample,
    InitialUncertainty,
    InvalidImuSampleError,
    NavCov,
    NavState,
    error_transition,
    mechanize,
    propagate_error_cov,
    zupt_update,
)
from coopnav.ins.pipeline import (
    NavigationConfig,
    NavigationFix,
    StepWiseNavigator,
    ZuptAidedNavigator,
    read_imu_csv,
    run_step_wise_ins,
)
from coopnav.ins.segmenter import (
    ReseedMode,
    SegmenterConfig,
    StepSegmenter,
    StepUpdate,
    reset_navigation,
    step_segment,
)

__all__ = [
    "Detection",
    "DetectorConfig",
    "GRAVITY",
    "ImuNoise",
    "ImuSample",
    "InitialUncertainty",
    "InvalidImuSampleError",
    "NavCov",
    "NavState",
    "NavigationConfig",
    "NavigationFix",
    "ReseedMode",
    "SegmenterConfig",
    "StepSegmenter",
    "StepUpdate",
    "StepWiseNavigator",
    "ZuptAidedNavigator",
    "calibrate_threshold",
    "error_transition",
    "glrt_statistic",
    "mechanize",
    "propagate_error_cov",
    "read_imu_csv",
    "reset_navigation",
    "run_step_wise_ins",
    "step_segment",
    "zupt_detect",
    "zupt_update",
]
