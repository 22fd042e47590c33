"""
Agreement of step-wise navigation plus dead reckoning with the indefinite
ZUPT-aided filter on the same IMU stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from coopnav.deadreck import TrackState, dr_propagate
from coopnav.ins.navigation import YAW
from coopnav.ins.pipeline import (
    NavigationConfig,
    NavigationFix,
    StepWiseNavigator,
    ZuptAidedNavigator,
)
from coopnav.ins.segmenter import StepUpdate
from coopnav.scenarios.gait import GaitParams, synth_imu_gait

COMPARED = [0, 1, 2, YAW]


@dataclass(frozen=True)
class ConsistencyRow:
    seq: int
    t: float
    mean_ratio: float
    cov_ratio: float
    position_std: float


@dataclass
class ConsistencyReport:
    rows: List[ConsistencyRow] = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.rows)

    @property
    def max_mean_ratio(self) -> float:
        return max((r.mean_ratio for r in self.rows), default=0.0)

    @property
    def max_cov_ratio(self) -> float:
        return max((r.cov_ratio for r in self.rows), default=0.0)

    def passed(self, mean_tol: float = 0.05, cov_tol: float = 0.1) -> bool:
        return self.max_mean_ratio < mean_tol and self.max_cov_ratio < cov_tol

    def to_dict(self) -> Dict[str, object]:
        return {
            "steps": self.steps,
            "max_mean_ratio": self.max_mean_ratio,
            "max_cov_ratio": self.max_cov_ratio,
        }


def compare(track: TrackState, fix: NavigationFix, seq: int) -> ConsistencyRow:
    """
    Mean deviation per position axis in units of the indefinite filter's
    standard deviation, and covariance deviation of the position and
    position-heading elements in units of sqrt(P_ii P_jj).
    """
    ref_P = fix.P[np.ix_(COMPARED, COMPARED)]
    std = np.sqrt(np.maximum(np.diag(ref_P), 1e-300))
    mean_ratio = float(np.max(np.abs(track.x - fix.position) / std[:3]))
    scale = np.outer(std, std)
    diff = np.abs(track.P - ref_P) / scale
    cov_ratio = float(diff[:3, :].max())
    return ConsistencyRow(
        seq=seq,
        t=fix.t,
        mean_ratio=mean_ratio,
        cov_ratio=cov_ratio,
        position_std=float(np.sqrt(np.trace(ref_P[:3, :3]))),
    )


def consistency_check(
    params: Optional[GaitParams] = None,
    cfg: Optional[NavigationConfig] = None,
    seed: Optional[int] = None,
) -> ConsistencyReport:
    """
    Run both filters over one synthetic gait and compare them at every step.
    The dead-reckoning track starts at heading zero: the first step carries
    the absolute heading of the navigator.
    """
    params = params or GaitParams(strides=200, turn=0.05)
    cfg = cfg or NavigationConfig()
    samples, truth = synth_imu_gait(params, seed)
    initial = truth.initial_state()
    split = StepWiseNavigator(cfg, initial)
    indefinite = ZuptAidedNavigator(cfg, initial)
    track = TrackState(x=initial.p, chi=0.0, P=np.zeros((4, 4)), seq=0)
    fixes: Dict[float, NavigationFix] = {}
    report = ConsistencyReport()

    steps: List[StepUpdate] = []
    for sample in samples:
        fixes[sample.t] = indefinite.process(sample)
        u = split.process(sample)
        if u is not None:
            steps.append(u)
    last = split.flush()
    if last is not None:
        steps.append(last)

    for u in steps:
        track = dr_propagate(track, u)
        report.rows.append(compare(track, fixes[u.t_step], u.seq))
    return report
