import math
import re

import numpy as np
import pytest

from coopnav.ins.navigation import (
    GRAVITY,
    ImuNoise,
    ImuSample,
    InvalidImuSampleError,
    NavState,
    error_transition,
    mechanize,
    propagate_error_cov,
    zupt_update,
)
from coopnav.scenarios.gait import GaitParams, synth_imu_gait
from coopnav.validation import InvalidInputError
from tests import assert_covariance

AT_REST = ImuSample(0.0, [0.0, 0.0, GRAVITY], [0.0, 0.0, 0.0])


def test_invalid_sample() -> None:
    with pytest.raises(InvalidImuSampleError, match=re.escape("invalid imu sample: f must be finite")):
        ImuSample(0.0, [0.0, np.nan, 0.0], [0.0, 0.0, 0.0])


def test_nav_state_normalizes_quaternion() -> None:
    s = NavState(q=[0.0, 0.0, 0.0, 2.0])
    assert np.allclose(s.q, [0.0, 0.0, 0.0, 1.0])
    with pytest.raises(InvalidInputError):
        NavState(q=[0.0, 0.0, 0.0, 0.0])


@pytest.mark.parametrize("yaw", [0.0, 0.7, -2.5, math.pi - 1e-6])
def test_yaw_of_euler_state(yaw: float) -> None:
    assert NavState.from_euler(roll=0.1, pitch=-0.2, yaw=yaw).yaw == pytest.approx(yaw, abs=1e-9)


def test_mechanize_at_rest_stays_put() -> None:
    s = NavState.from_euler(yaw=1.0, p=np.array([1.0, 2.0, 3.0]))
    for _ in range(100):
        s = mechanize(s, AT_REST, 0.005)
    assert np.allclose(s.p, [1.0, 2.0, 3.0])
    assert np.allclose(s.v, 0.0)
    assert s.yaw == pytest.approx(1.0)


def test_mechanize_rejects_bad_interval() -> None:
    with pytest.raises(InvalidInputError, match="dt '0.0' must be positive"):
        mechanize(NavState(), AT_REST, 0.0)


def test_mechanize_reproduces_synthetic_gait() -> None:
    params = GaitParams(strides=3, turn=0.2)
    samples, truth = synth_imu_gait(params)
    s = truth.initial_state()
    for k in range(1, len(samples)):
        s = mechanize(s, samples[k], params.dt)
        assert np.allclose(s.p, truth.positions[k], atol=1e-9)
        assert np.allclose(s.v, truth.velocities[k], atol=1e-9)
    assert s.yaw == pytest.approx(truth.yaws[-1], abs=1e-9)


def test_error_transition_couples_tilt_into_velocity() -> None:
    dt = 0.01
    F = error_transition(NavState(), AT_REST, dt)
    assert np.allclose(F[0:3, 3:6], np.eye(3) * dt)
    # a roll error tilts gravity into the y velocity
    assert F[4, 6] == pytest.approx(-GRAVITY * dt)
    assert F[3, 7] == pytest.approx(GRAVITY * dt)
    assert np.allclose(F[:, 8][3:6], 0.0)


def test_covariance_grows_without_updates() -> None:
    noise = ImuNoise()
    P = np.zeros((9, 9))
    for _ in range(10):
        P = propagate_error_cov(P, NavState(), AT_REST, 0.005, noise.process_noise(0.005))
    assert np.all(np.diag(P)[3:] > 0)
    assert np.allclose(P, P.T)


def test_zupt_update_pulls_velocity_to_zero() -> None:
    noise = ImuNoise()
    P = np.diag([1e-4] * 3 + [1.0] * 3 + [1e-4] * 3)
    s = NavState(v=np.array([0.5, -0.2, 0.1]))
    corrected, P_new = zupt_update(s, P, noise.zupt_noise())
    assert np.linalg.norm(corrected.v) < 1e-3
    assert np.all(np.diag(P_new)[3:6] < noise.sigma_zupt**2 * 1.01)
    assert np.allclose(P_new, P_new.T)


def test_random_propagation_and_zupt_keep_a_valid_state() -> None:
    rng = np.random.default_rng(51)
    noise = ImuNoise()
    for _ in range(1000):
        roll, pitch = rng.uniform(-0.5, 0.5, size=2)
        s = NavState.from_euler(
            roll=float(roll),
            pitch=float(pitch),
            yaw=float(rng.uniform(-math.pi, math.pi)),
            p=rng.normal(size=3),
            v=rng.normal(size=3),
        )
        A = rng.normal(size=(9, 9)) * 0.1
        P = A @ A.T + 1e-6 * np.eye(9)
        m = ImuSample(0.0, rng.normal([0.0, 0.0, GRAVITY], 5.0), rng.normal(size=3))
        dt = float(rng.uniform(0.001, 0.02))
        s = mechanize(s, m, dt)
        P = propagate_error_cov(P, s, m, dt, noise.process_noise(dt))
        assert_covariance(P)
        s, P = zupt_update(s, P, noise.zupt_noise())
        assert_covariance(P)
        assert np.linalg.norm(s.q) == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.norm(s.rotation.as_quat()) == pytest.approx(1.0, abs=1e-12)
