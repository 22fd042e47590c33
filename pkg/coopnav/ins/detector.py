from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from coopnav.ins.navigation import GRAVITY, ImuSample
from coopnav.validation import (
    FloatArray,
    InvalidInputError,
    Validated,
    _validate_float_literal,
    _validate_int_literal,
)


@dataclass(frozen=True)
class DetectorConfig(Validated):
    """
    Parameters of the stance-hypothesis likelihood-ratio detector.

    ``lock_gamma`` enables the stationary lock: when the statistic stays below
    it for ``lock_samples`` consecutive samples the navigator stops integrating
    until motion is detected again.
    """

    window_len: int = 5
    gamma_z: float = 3.0e4
    sigma_f: float = 0.01
    sigma_w: float = math.radians(0.1)
    gravity: float = GRAVITY
    lock_gamma: Optional[float] = None
    lock_samples: int = 200

    def validate(self) -> None:
        _validate_int_literal("window_len", self.window_len, 2, None)
        _validate_float_literal("gamma_z", self.gamma_z, 0.0, strict=True)
        _validate_float_literal("sigma_f", self.sigma_f, 0.0, strict=True)
        _validate_float_literal("sigma_w", self.sigma_w, 0.0, strict=True)
        _validate_float_literal("gravity", self.gravity, 0.0, strict=True)
        if self.lock_gamma is not None:
            _validate_float_literal(
                "lock_gamma", self.lock_gamma, 0.0, self.gamma_z, strict=True
            )
        _validate_int_literal("lock_samples", self.lock_samples, 1, None)


class Detection(NamedTuple):
    stationary: bool
    statistic: float


def glrt_statistic(acc: FloatArray, gyro: FloatArray, cfg: DetectorConfig) -> float:
    """
    Likelihood-ratio statistic over a (W, 3) accelerometer and gyro window:
    mean over the window of the squared deviation of the specific force from
    gravity along the mean direction, plus the gyro energy, each normalized by
    its noise variance.
    """
    mean = acc.mean(axis=0)
    norm = float(np.linalg.norm(mean))
    g_comp = cfg.gravity * mean / norm if norm > 0 else np.zeros(3)
    dev = acc - g_comp
    total = np.sum(dev * dev) / cfg.sigma_f**2 + np.sum(gyro * gyro) / cfg.sigma_w**2
    return float(total) / acc.shape[0]


def zupt_detect(window: Sequence[ImuSample], cfg: DetectorConfig) -> Detection:
    """
    :raises InvalidInputError: If the window is not exactly ``cfg.window_len``
        samples long.
    """
    if len(window) != cfg.window_len:
        raise InvalidInputError(
            f"window of {len(window)} samples does not match window_len {cfg.window_len}"
        )
    acc = np.array([m.f for m in window])
    gyro = np.array([m.w for m in window])
    statistic = glrt_statistic(acc, gyro, cfg)
    return Detection(statistic < cfg.gamma_z, statistic)


def calibrate_threshold(
    cfg: DetectorConfig,
    false_alarm: float = 0.01,
    trials: int = 20000,
    seed: int = 0,
) -> float:
    """
    Threshold for which a fraction ``false_alarm`` of noise-only stance windows
    would be declared moving. Noise follows ``sigma_f`` and ``sigma_w``.
    """
    _validate_float_literal("false_alarm", false_alarm, 0.0, 1.0, strict=True)
    _validate_int_literal("trials", trials, 100, None)
    rng = np.random.default_rng(seed)
    W = cfg.window_len
    acc = rng.normal(0.0, cfg.sigma_f, size=(trials, W, 3))
    acc[:, :, 2] += cfg.gravity
    gyro = rng.normal(0.0, cfg.sigma_w, size=(trials, W, 3))

    mean = acc.mean(axis=1, keepdims=True)
    g_comp = cfg.gravity * mean / np.linalg.norm(mean, axis=2, keepdims=True)
    dev = acc - g_comp
    stats = (
        np.sum(dev * dev, axis=(1, 2)) / cfg.sigma_f**2
        + np.sum(gyro * gyro, axis=(1, 2)) / cfg.sigma_w**2
    ) / W
    return float(np.quantile(stats, 1.0 - false_alarm))
