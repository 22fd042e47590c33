"""
Per-foot navigators. ``StepWiseNavigator`` is the production path: it runs
the ZUPT-aided filter and emits a StepUpdate at every reset.
``ZuptAidedNavigator`` never resets and serves as the reference in the
split-filter consistency check.
"""

from __future__ import annotations

import csv
import logging
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Deque, Iterable, Iterator, List, NamedTuple, Optional, Union

import numpy as np

from coopnav.ins.detector import Detection, DetectorConfig, glrt_statistic
from coopnav.ins.navigation import (
    ImuNoise,
    ImuSample,
    InitialUncertainty,
    NavCov,
    NavState,
    mechanize,
    propagate_error_cov,
    zupt_update,
)
from coopnav.ins.segmenter import SegmenterConfig, StepSegmenter, StepUpdate
from coopnav.validation import FloatArray, InvalidInputError, Validated

logger = logging.getLogger(__name__)

IMU_CSV_COLUMNS = ("t", "fx", "fy", "fz", "wx", "wy", "wz")


@dataclass(frozen=True)
class NavigationConfig(Validated):
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    segmenter: SegmenterConfig = field(default_factory=SegmenterConfig)
    noise: ImuNoise = field(default_factory=ImuNoise)
    initial: InitialUncertainty = field(default_factory=InitialUncertainty)

    def validate(self) -> None:
        for name, kind in (
            ("detector", DetectorConfig),
            ("segmenter", SegmenterConfig),
            ("noise", ImuNoise),
            ("initial", InitialUncertainty),
        ):
            value = getattr(self, name)
            if not isinstance(value, kind):
                raise InvalidInputError(f"{name} must be a {kind.__name__}")
            value.validate()


class _ZuptFilter:
    """Shared sample loop: detection window, stationary lock, integration."""

    def __init__(
        self,
        cfg: NavigationConfig,
        state: Optional[NavState] = None,
        P: Optional[NavCov] = None,
    ) -> None:
        self.cfg = cfg
        self.state = state if state is not None else NavState()
        self.P = P.copy() if P is not None else cfg.initial.covariance()
        self.R = cfg.noise.zupt_noise()
        W = cfg.detector.window_len
        self._acc: Deque[FloatArray] = deque(maxlen=W)
        self._gyro: Deque[FloatArray] = deque(maxlen=W)
        self._t_prev: Optional[float] = None
        self._quiet = 0
        self.locked = False

    @property
    def t(self) -> Optional[float]:
        return self._t_prev

    def _detect(self, sample: ImuSample) -> Detection:
        self._acc.append(sample.f)
        self._gyro.append(sample.w)
        dcfg = self.cfg.detector
        if len(self._acc) < dcfg.window_len:
            return Detection(False, float("inf"))
        statistic = glrt_statistic(np.array(self._acc), np.array(self._gyro), dcfg)
        stationary = statistic < dcfg.gamma_z

        if dcfg.lock_gamma is not None and statistic < dcfg.lock_gamma:
            self._quiet += 1
            if self._quiet >= dcfg.lock_samples and not self.locked:
                logger.debug("stationary lock engaged at t=%.3f", sample.t)
                self.locked = True
        else:
            self._quiet = 0
            if self.locked and not stationary:
                logger.debug("stationary lock released at t=%.3f", sample.t)
                self.locked = False
        return Detection(stationary, statistic)

    def _integrate(self, sample: ImuSample, detection: Detection) -> None:
        if self._t_prev is None:
            self._t_prev = sample.t
            return
        dt = sample.t - self._t_prev
        if not dt > 0:
            raise InvalidInputError(
                f"sample time {sample.t} does not follow {self._t_prev}"
            )
        self._t_prev = sample.t
        if self.locked:
            return
        noise = self.cfg.noise
        self.P = propagate_error_cov(
            self.P, self.state, sample, dt, noise.process_noise(dt)
        )
        self.state = mechanize(self.state, sample, dt, noise.gravity)
        if detection.stationary:
            self.state, self.P = zupt_update(self.state, self.P, self.R)


class StepWiseNavigator(_ZuptFilter):
    """
    ZUPT-aided navigation with step segmentation. The reset decision for a
    sample is taken before that sample is integrated, so every emitted step
    ends on the last sample judged stationary.
    """

    def __init__(
        self,
        cfg: NavigationConfig,
        state: Optional[NavState] = None,
        P: Optional[NavCov] = None,
    ) -> None:
        super().__init__(cfg, state, P)
        self.segmenter = StepSegmenter(cfg.segmenter)

    def process(self, sample: ImuSample) -> Optional[StepUpdate]:
        detection = self._detect(sample)
        update = None
        if self._t_prev is not None and self.segmenter.advance(
            detection.stationary, self.P
        ):
            self.state, self.P, update = self.segmenter.reset(
                self.state, self.P, self._t_prev
            )
        self._integrate(sample, detection)
        return update

    def flush(self) -> Optional[StepUpdate]:
        """Emit the pending step at the end of a stream, if there is one."""
        if self._t_prev is None or not self.segmenter.is_pending(self.P):
            return None
        self.state, self.P, update = self.segmenter.reset(
            self.state, self.P, self._t_prev
        )
        return update


class NavigationFix(NamedTuple):
    t: float
    position: FloatArray
    yaw: float
    P: NavCov


class ZuptAidedNavigator(_ZuptFilter):
    """The indefinite filter: same loop, no resets. Keeps a per-sample log."""

    def __init__(
        self,
        cfg: NavigationConfig,
        state: Optional[NavState] = None,
        P: Optional[NavCov] = None,
    ) -> None:
        super().__init__(cfg, state, P)
        self.history: List[NavigationFix] = []

    def process(self, sample: ImuSample) -> NavigationFix:
        self._integrate(sample, self._detect(sample))
        fix = NavigationFix(sample.t, self.state.p.copy(), self.state.yaw, self.P)
        self.history.append(fix)
        return fix


def run_step_wise_ins(
    samples: Iterable[ImuSample],
    cfg: Optional[NavigationConfig] = None,
    state: Optional[NavState] = None,
    flush: bool = True,
) -> Iterator[StepUpdate]:
    """
    Run a time-ordered IMU stream through a fresh StepWiseNavigator.

    :param samples: The IMU stream of one foot.
    :param cfg: Navigation parameters, defaults when omitted.
    :param state: Initial attitude (position and velocity should be zero).
    :param flush: Emit the pending step at the end of the stream.
    """
    navigator = StepWiseNavigator(cfg or NavigationConfig(), state)
    for sample in samples:
        update = navigator.process(sample)
        if update is not None:
            yield update
    if flush:
        last = navigator.flush()
        if last is not None:
            yield last


def read_imu_csv(path: Union[str, Path]) -> List[ImuSample]:
    """
    Load an IMU log with the columns t, fx, fy, fz, wx, wy, wz (SI units).

    :raises InvalidInputError: If a column is missing or a value is malformed.
    """
    samples = []
    with open(path, newline="") as in_file:
        reader = csv.DictReader(in_file)
        missing = set(IMU_CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise InvalidInputError(f"imu log is missing columns {sorted(missing)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                values = [float(row[c]) for c in IMU_CSV_COLUMNS]
            except ValueError as e:
                raise InvalidInputError(f"line {lineno}: {e}") from e
            samples.append(ImuSample(values[0], values[1:4], values[4:7]))
    return samples
