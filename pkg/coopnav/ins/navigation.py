"""
Strapdown mechanization and the 9-state error filter used between resets.

Error states are ordered [dp, dv, dtheta] and defined as truth minus estimate,
with the attitude error a navigation-frame rotation vector
(R_true = Exp(dtheta) R_est). Orientation is stored as a scalar-last unit
quaternion, body to navigation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from coopnav.linalg import INNOVATION_JITTER, skew, solve_spd, symmetrize
from coopnav.validation import (
    FloatArray,
    InvalidInputError,
    Validated,
    _validate_float_literal,
    as_array,
)

GRAVITY = 9.81
STATE_DIM = 9
POS = slice(0, 3)
VEL = slice(3, 6)
ATT = slice(6, 9)
YAW = 8

# The 9x9 error covariance over [dp, dv, dtheta].
NavCov = FloatArray

IDENTITY_QUATERNION = (0.0, 0.0, 0.0, 1.0)


class InvalidImuSampleError(InvalidInputError):
    pass


@dataclass(frozen=True, eq=False)
class ImuSample(Validated):
    t: float
    f: FloatArray
    w: FloatArray

    def validate(self) -> None:
        try:
            _validate_float_literal("t", self.t)
            self._coerce("f", as_array("f", self.f, (3,)))
            self._coerce("w", as_array("w", self.w, (3,)))
        except InvalidInputError as e:
            raise InvalidImuSampleError(f"invalid imu sample: {e}") from e


@dataclass(frozen=True, eq=False)
class NavState(Validated):
    p: FloatArray = field(default_factory=lambda: np.zeros(3))
    v: FloatArray = field(default_factory=lambda: np.zeros(3))
    q: FloatArray = field(default_factory=lambda: np.array(IDENTITY_QUATERNION))

    def validate(self) -> None:
        self._coerce("p", as_array("p", self.p, (3,)))
        self._coerce("v", as_array("v", self.v, (3,)))
        q = as_array("q", self.q, (4,))
        norm = float(np.linalg.norm(q))
        if norm < 0.5:
            raise InvalidInputError(f"q '{q}' is not a rotation")
        if abs(norm - 1.0) > 1e-12:
            q = q / norm
        self._coerce("q", q)

    @property
    def rotation(self) -> Rotation:
        return Rotation.from_quat(self.q)

    @property
    def yaw(self) -> float:
        R = self.rotation.as_matrix()
        return math.atan2(R[1, 0], R[0, 0])

    @classmethod
    def from_euler(
        cls,
        roll: float = 0.0,
        pitch: float = 0.0,
        yaw: float = 0.0,
        p: Optional[FloatArray] = None,
        v: Optional[FloatArray] = None,
    ) -> NavState:
        q = Rotation.from_euler("ZYX", [yaw, pitch, roll]).as_quat()
        return cls(
            p=np.zeros(3) if p is None else p,
            v=np.zeros(3) if v is None else v,
            q=q,
        )


@dataclass(frozen=True)
class ImuNoise(Validated):
    """
    Noise levels assumed by the filter. The process noise is deliberately
    larger than raw sensor noise to absorb unmodelled gait dynamics.
    """

    sigma_acc: float = 0.5
    sigma_gyro: float = math.radians(0.5)
    sigma_zupt: float = 0.01
    gravity: float = GRAVITY

    def validate(self) -> None:
        _validate_float_literal("sigma_acc", self.sigma_acc, 0.0)
        _validate_float_literal("sigma_gyro", self.sigma_gyro, 0.0)
        _validate_float_literal("sigma_zupt", self.sigma_zupt, 0.0, strict=True)
        _validate_float_literal("gravity", self.gravity, 0.0, strict=True)

    def process_noise(self, dt: float) -> FloatArray:
        q = np.zeros(STATE_DIM)
        q[VEL] = (self.sigma_acc * dt) ** 2
        q[ATT] = (self.sigma_gyro * dt) ** 2
        return np.diag(q)

    def zupt_noise(self) -> FloatArray:
        return np.eye(3) * self.sigma_zupt**2


@dataclass(frozen=True)
class InitialUncertainty(Validated):
    sigma_v: float = 0.01
    sigma_tilt: float = math.radians(0.5)

    def validate(self) -> None:
        _validate_float_literal("sigma_v", self.sigma_v, 0.0)
        _validate_float_literal("sigma_tilt", self.sigma_tilt, 0.0)

    def covariance(self) -> NavCov:
        d = np.zeros(STATE_DIM)
        d[VEL] = self.sigma_v**2
        d[6:8] = self.sigma_tilt**2
        return np.diag(d)


def mechanize(
    s: NavState, m: ImuSample, dt: float, gravity: float = GRAVITY
) -> NavState:
    """
    One strapdown integration step.

    :param s: The state at the previous sample.
    :param m: The current IMU reading.
    :param dt: Sample interval in seconds.
    :raises InvalidInputError: If dt is not positive.
    """
    if not dt > 0:
        raise InvalidInputError(f"dt '{dt}' must be positive")
    R = s.rotation
    f_nav = R.apply(m.f)
    return NavState(
        p=s.p + s.v * dt,
        v=s.v + (f_nav - np.array([0.0, 0.0, gravity])) * dt,
        q=(R * Rotation.from_rotvec(m.w * dt)).as_quat(),
    )


def error_transition(s: NavState, m: ImuSample, dt: float) -> FloatArray:
    F = np.eye(STATE_DIM)
    F[POS, VEL] = np.eye(3) * dt
    F[VEL, ATT] = -skew(s.rotation.apply(m.f)) * dt
    return F


def propagate_error_cov(
    P: NavCov, s: NavState, m: ImuSample, dt: float, Q: FloatArray
) -> NavCov:
    F = error_transition(s, m, dt)
    return symmetrize(F @ P @ F.T + Q)


def zupt_update(
    s: NavState, P: NavCov, R: FloatArray
) -> Tuple[NavState, NavCov]:
    """
    Zero-velocity pseudo-measurement update followed by immediate feedback.

    The measurement of the velocity error is 0 - v_est. After the update the
    error estimate is folded back into the state and implicitly zeroed.

    :raises DegenerateCovarianceError: If the innovation covariance is
        ill-conditioned after jitter.
    """
    S = P[VEL, VEL] + R + INNOVATION_JITTER * np.eye(3)
    K = solve_spd(symmetrize(S), P[VEL, :], "innovation covariance").T
    dx = K @ (-s.v)

    I_KH = np.eye(STATE_DIM)
    I_KH[:, VEL] -= K
    P_new = symmetrize(I_KH @ P @ I_KH.T + K @ R @ K.T)

    corrected = NavState(
        p=s.p + dx[POS],
        v=s.v + dx[VEL],
        q=(Rotation.from_rotvec(dx[ATT]) * s.rotation).as_quat(),
    )
    return corrected, P_new
