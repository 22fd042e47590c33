"""
Synthetic foot-mounted IMU streams.

The trajectory is a sequence of strides: a swing phase in which the foot moves
forward along its heading, lifts, pitches and turns, followed by a stance phase
at rest. The IMU readings are derived from the sampled trajectory so that
strapdown integration reproduces it exactly; noise can be added on top.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from coopnav.ins.navigation import GRAVITY, ImuSample, NavState
from coopnav.linalg import planar_rotation
from coopnav.validation import (
    FloatArray,
    Validated,
    _validate_float_literal,
    _validate_int_literal,
    wrap_angle,
)


@dataclass(frozen=True)
class GaitParams(Validated):
    """
    :param turn: Heading change per stride in radians.
    :param pitch: Peak foot pitch during swing in radians.
    """

    strides: int = 100
    stride_length: float = 1.0
    rate: float = 200.0
    swing_samples: int = 120
    stance_samples: int = 80
    initial_stance: int = 30
    height: float = 0.15
    pitch: float = 0.5
    turn: float = 0.0
    initial_heading: float = 0.0
    sigma_acc: float = 0.0
    sigma_gyro: float = 0.0
    gravity: float = GRAVITY

    def validate(self) -> None:
        _validate_int_literal("strides", self.strides, 0, None)
        _validate_float_literal("stride_length", self.stride_length, 0.0)
        _validate_float_literal("rate", self.rate, 0.0, strict=True)
        _validate_int_literal("swing_samples", self.swing_samples, 2, None)
        _validate_int_literal("stance_samples", self.stance_samples, 1, None)
        _validate_int_literal("initial_stance", self.initial_stance, 1, None)
        _validate_float_literal("height", self.height, 0.0)
        _validate_float_literal("pitch", self.pitch, -1.5, 1.5)
        _validate_float_literal("turn", self.turn, -math.pi, math.pi)
        _validate_float_literal("initial_heading", self.initial_heading)
        _validate_float_literal("sigma_acc", self.sigma_acc, 0.0)
        _validate_float_literal("sigma_gyro", self.sigma_gyro, 0.0)
        _validate_float_literal("gravity", self.gravity, 0.0, strict=True)

    @property
    def dt(self) -> float:
        return 1.0 / self.rate

    @property
    def samples(self) -> int:
        return self.initial_stance + self.strides * (self.swing_samples + self.stance_samples)


@dataclass(frozen=True, eq=False)
class GaitTruth:
    times: FloatArray
    positions: FloatArray
    velocities: FloatArray
    quaternions: FloatArray
    yaws: FloatArray
    stance_ends: Tuple[int, ...]

    def initial_state(self) -> NavState:
        return NavState(p=self.positions[0], v=self.velocities[0], q=self.quaternions[0])

    def stride_increments(self) -> List[Tuple[FloatArray, float]]:
        """
        Displacement in the frame of the previous stance heading, and heading
        change, of every stride, measured between the ends of stance phases.
        """
        out = []
        for prev, end in zip(self.stance_ends, self.stance_ends[1:]):
            R = planar_rotation(float(self.yaws[prev]))
            dp = R.T @ (self.positions[end] - self.positions[prev])
            out.append((dp, wrap_angle(float(self.yaws[end] - self.yaws[prev]))))
        return out


def _smooth_ramp(tau: FloatArray) -> FloatArray:
    return tau - np.sin(2 * math.pi * tau) / (2 * math.pi)


def synth_imu_gait(
    params: Optional[GaitParams] = None, seed: Optional[int] = None
) -> Tuple[List[ImuSample], GaitTruth]:
    """
    :returns: The IMU stream and the trajectory it was derived from. Without
        noise, mechanizing the stream from ``truth.initial_state()`` reproduces
        the trajectory to rounding.
    """
    params = params or GaitParams()
    n = params.samples
    dt = params.dt
    rng = np.random.default_rng(seed)

    velocities = np.zeros((n, 3))
    yaws = np.full(n, params.initial_heading)
    pitches = np.zeros(n)
    stance_ends = [params.initial_stance - 1]

    k = params.initial_stance
    heading = params.initial_heading
    T = params.swing_samples * dt
    for _ in range(params.strides):
        tau = np.arange(1, params.swing_samples + 1) / params.swing_samples
        sl = slice(k, k + params.swing_samples)
        speed = params.stride_length * (1 - np.cos(2 * math.pi * tau)) / T
        velocities[sl, 0] = speed * math.cos(heading)
        velocities[sl, 1] = speed * math.sin(heading)
        velocities[sl, 2] = params.height * math.pi * np.sin(2 * math.pi * tau) / T
        yaws[sl] = heading + params.turn * _smooth_ramp(tau)
        pitches[sl] = params.pitch * (1 - np.cos(2 * math.pi * tau)) / 2
        k += params.swing_samples
        heading += params.turn
        yaws[k : k + params.stance_samples] = heading
        k += params.stance_samples
        stance_ends.append(k - 1)

    rotations = Rotation.from_euler("ZYX", np.column_stack([yaws, pitches, np.zeros(n)]))
    positions = np.zeros((n, 3))
    positions[1:] = np.cumsum(velocities[:-1] * dt, axis=0)
    g = np.array([0.0, 0.0, params.gravity])

    f = np.zeros((n, 3))
    w = np.zeros((n, 3))
    f[0] = rotations[0].inv().apply(g)
    previous = rotations[:-1]
    f[1:] = previous.inv().apply((velocities[1:] - velocities[:-1]) / dt + g)
    w[1:] = (previous.inv() * rotations[1:]).as_rotvec() / dt
    if params.sigma_acc > 0:
        f += rng.normal(0.0, params.sigma_acc, size=f.shape)
    if params.sigma_gyro > 0:
        w += rng.normal(0.0, params.sigma_gyro, size=w.shape)

    times = np.arange(n) * dt
    samples = [ImuSample(float(times[i]), f[i], w[i]) for i in range(n)]
    truth = GaitTruth(
        times=times,
        positions=positions,
        velocities=velocities,
        quaternions=rotations.as_quat(),
        yaws=np.array([wrap_angle(float(y)) for y in yaws]),
        stance_ends=tuple(stance_ends),
    )
    return samples, truth
