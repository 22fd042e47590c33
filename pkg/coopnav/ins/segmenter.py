"""
Recursive step segmentation: decides when the local navigation frame is
reset and packages the accumulated displacement and heading change since the
previous reset as a StepUpdate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Iterator, Optional, Tuple

import numpy as np
import scipy.linalg
from scipy.spatial.transform import Rotation

from coopnav.ins.navigation import POS, STATE_DIM, YAW, NavCov, NavState
from coopnav.linalg import min_eigenvalue, planar_rotation, project_psd, symmetrize
from coopnav.validation import (
    FloatArray,
    InvalidInputError,
    Validated,
    _validate_float_literal,
    _validate_int_literal,
    as_array,
)

logger = logging.getLogger(__name__)


class ReseedMode(Enum):
    # keep the whole covariance, rotated into the new frame; steps report the increment
    CARRY = "carry"
    # carry the velocity/roll/pitch block across the reset, rotated into the new frame
    RETAIN = "retain"
    # zero everything and put fixed floors on the velocity/roll/pitch variances
    FLOOR = "floor"


@dataclass(frozen=True)
class SegmenterConfig(Validated):
    gamma_p: float = 1.0e-4
    c_min: int = 40
    c_max: int = 120
    reseed: ReseedMode = ReseedMode.CARRY
    reseed_floor: float = 1.0e-6

    def validate(self) -> None:
        _validate_float_literal("gamma_p", self.gamma_p, 0.0, strict=True)
        _validate_int_literal("c_min", self.c_min, 0, None)
        _validate_int_literal("c_max", self.c_max, 1, None)
        if self.c_min >= self.c_max:
            raise InvalidInputError(
                f"c_min '{self.c_min}' must be smaller than c_max '{self.c_max}'"
            )
        if not isinstance(self.reseed, ReseedMode):
            raise InvalidInputError(f"reseed '{self.reseed}' must be a ReseedMode")
        _validate_float_literal("reseed_floor", self.reseed_floor, 0.0)


@dataclass(frozen=True, eq=False)
class StepUpdate(Validated):
    seq: int
    dp: FloatArray
    dpsi: float
    P_p: FloatArray
    P_ppsi: FloatArray
    P_psipsi: float
    t_step: float

    def validate(self) -> None:
        _validate_int_literal("seq", self.seq, 0, None)
        self._coerce("dp", as_array("dp", self.dp, (3,)))
        _validate_float_literal("dpsi", self.dpsi)
        self._coerce("P_p", as_array("P_p", self.P_p, (3, 3)))
        self._coerce("P_ppsi", as_array("P_ppsi", self.P_ppsi, (3,)))
        _validate_float_literal("P_psipsi", self.P_psipsi, 0.0)
        _validate_float_literal("t_step", self.t_step)
        cov = self.covariance
        scale = max(float(np.abs(cov).max()), 1.0)
        if np.abs(cov - cov.T).max() > 1e-9 * scale:
            raise InvalidInputError("step covariance must be symmetric")
        if min_eigenvalue(cov) < -1e-9 * scale:
            raise InvalidInputError("step covariance must be positive semidefinite")

    @property
    def covariance(self) -> FloatArray:
        """The 4x4 covariance over [dp, dpsi]."""
        cov = np.empty((4, 4))
        cov[:3, :3] = self.P_p
        cov[:3, 3] = self.P_ppsi
        cov[3, :3] = self.P_ppsi
        cov[3, 3] = self.P_psipsi
        return cov

    def without_cross_covariance(self) -> StepUpdate:
        return replace(self, P_ppsi=np.zeros(3))


DR_INDEX = np.r_[0:3, YAW]


def extract_step(seq: int, state: NavState, P: NavCov, t: float) -> StepUpdate:
    P = symmetrize(P)
    return StepUpdate(
        seq=seq,
        dp=state.p.copy(),
        dpsi=state.yaw,
        P_p=P[POS, POS].copy(),
        P_ppsi=P[POS, YAW].copy(),
        P_psipsi=float(P[YAW, YAW]),
        t_step=t,
    )


def local_step_jacobian(dp: FloatArray) -> FloatArray:
    """Jacobian of [x + dp, chi + dpsi] with respect to [x, chi] at chi = 0."""
    F = np.eye(4)
    F[0, 3] = -dp[1]
    F[1, 3] = dp[0]
    return F


def extract_carried_step(
    seq: int, state: NavState, P: NavCov, anchor: FloatArray, t: float
) -> StepUpdate:
    """
    The step of a filter that carries its position/heading covariance across
    resets. ``anchor`` is the position/heading block right after the previous
    reset; the step covariance is what dead reckoning has to add to the
    transported anchor to arrive at the current block.
    """
    F = local_step_jacobian(state.p)
    cov = symmetrize(P[np.ix_(DR_INDEX, DR_INDEX)] - F @ anchor @ F.T)
    if min_eigenvalue(cov) < 0.0:
        logger.debug(
            "step %d covariance increment is indefinite (%.3e), projecting",
            seq,
            min_eigenvalue(cov),
        )
        cov = project_psd(cov)
    return StepUpdate(
        seq=seq,
        dp=state.p.copy(),
        dpsi=state.yaw,
        P_p=cov[:3, :3].copy(),
        P_ppsi=cov[:3, 3].copy(),
        P_psipsi=float(cov[3, 3]),
        t_step=t,
    )


def reset_navigation(
    state: NavState, P: NavCov, cfg: SegmenterConfig
) -> Tuple[NavState, NavCov]:
    """
    Restart the local frame at the current position and heading: position,
    velocity and yaw are zeroed (roll and pitch kept) and the covariance is
    carried, or zeroed and re-seeded, according to ``cfg.reseed``.
    """
    yaw = state.yaw
    q = (Rotation.from_rotvec([0.0, 0.0, -yaw]) * state.rotation).as_quat()
    reset_state = NavState(p=np.zeros(3), v=np.zeros(3), q=q)

    Rz = planar_rotation(-yaw)
    if cfg.reseed is ReseedMode.CARRY:
        T = scipy.linalg.block_diag(Rz, Rz, Rz)
        return reset_state, symmetrize(T @ P @ T.T)

    reseeded = np.zeros((STATE_DIM, STATE_DIM))
    if cfg.reseed is ReseedMode.RETAIN:
        T = scipy.linalg.block_diag(Rz, Rz)
        reseeded[3:, 3:] = T @ P[3:, 3:] @ T.T
        reseeded[YAW, :] = 0.0
        reseeded[:, YAW] = 0.0
    else:
        idx = np.r_[3:YAW]  # velocity, roll, pitch
        reseeded[idx, idx] = cfg.reseed_floor
    return reset_state, symmetrize(reseeded)


class StepSegmenter:
    """
    The counter logic of the combined step-wise navigation loop. ``c_p``
    counts samples since the last reset, ``c_d`` counts samples a reset has
    been pending.
    """

    def __init__(self, cfg: SegmenterConfig, first_seq: int = 1) -> None:
        self.cfg = cfg
        self.c_p = 0
        self.c_d = 0
        self.next_seq = first_seq
        # position/heading block after the last reset, for carried covariances
        self.anchor: Optional[FloatArray] = None

    def is_pending(self, P: NavCov) -> bool:
        return bool(P[3, 3] < self.cfg.gamma_p and self.c_p > self.cfg.c_min)

    def advance(self, stationary: bool, P: NavCov) -> bool:
        """Count one sample; True when a reset must happen now."""
        if self.anchor is None:
            self.anchor = symmetrize(P[np.ix_(DR_INDEX, DR_INDEX)])
        self.c_p += 1
        if self.is_pending(P):
            self.c_d += 1
            if not stationary or self.c_d > self.cfg.c_max:
                return True
        return False

    def reset(
        self, state: NavState, P: NavCov, t: float
    ) -> Tuple[NavState, NavCov, StepUpdate]:
        if self.cfg.reseed is ReseedMode.CARRY:
            anchor = self.anchor
            if anchor is None:
                anchor = symmetrize(P[np.ix_(DR_INDEX, DR_INDEX)])
            update = extract_carried_step(self.next_seq, state, P, anchor, t)
        else:
            update = extract_step(self.next_seq, state, P, t)
        self.next_seq += 1
        self.c_p = 0
        self.c_d = 0
        new_state, new_P = reset_navigation(state, P, self.cfg)
        self.anchor = new_P[np.ix_(DR_INDEX, DR_INDEX)].copy()
        return new_state, new_P, update


def step_segment(
    stream: Iterable[Tuple[bool, NavState, NavCov, float]],
    cfg: SegmenterConfig,
) -> Iterator[Optional[StepUpdate]]:
    """
    Run the segmentation logic over a stream of (stationary flag, state,
    covariance, time) tuples taken as given, yielding the StepUpdate (or None)
    for every sample. The navigator in ``coopnav.ins.pipeline`` feeds the reset
    state back into the filter; this form only observes.
    """
    segmenter = StepSegmenter(cfg)
    for stationary, state, P, t in stream:
        if segmenter.advance(stationary, P):
            yield segmenter.reset(state, P, t)[2]
        else:
            yield None
