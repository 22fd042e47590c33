"""
Step-wise dead reckoning of one foot: chains StepUpdates into a global
position/heading track and merges corrections sent back by the fusion center.
"""

from __future__ import annotations

import logging
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Mapping, Optional, Tuple

import numpy as np

from coopnav.ins.segmenter import StepUpdate
from coopnav.linalg import min_eigenvalue, planar_rotation, symmetrize
from coopnav.validation import (
    FloatArray,
    InvalidInputError,
    Validated,
    _validate_float_literal,
    _validate_int_literal,
    as_array,
    wrap_angle,
)

logger = logging.getLogger(__name__)


class SequencingError(Exception):
    pass


@dataclass(frozen=True, eq=False)
class TrackState(Validated):
    x: FloatArray = field(default_factory=lambda: np.zeros(3))
    chi: float = 0.0
    P: FloatArray = field(default_factory=lambda: np.zeros((4, 4)))
    seq: int = 0

    def validate(self) -> None:
        self._coerce("x", as_array("x", self.x, (3,)))
        _validate_float_literal("chi", self.chi)
        object.__setattr__(self, "chi", wrap_angle(float(self.chi)))
        P = as_array("P", self.P, (4, 4))
        scale = max(float(np.abs(P).max()), 1.0)
        if np.abs(P - P.T).max() > 1e-9 * scale:
            raise InvalidInputError("track covariance must be symmetric")
        if min_eigenvalue(P) < -1e-9 * scale:
            raise InvalidInputError("track covariance must be positive semidefinite")
        self._coerce("P", P)
        _validate_int_literal("seq", self.seq, 0, None)

    @property
    def mean(self) -> FloatArray:
        return np.append(self.x, self.chi)


@dataclass(frozen=True, eq=False)
class Correction(Validated):
    seq: int
    dx: FloatArray
    dchi: float
    P: Optional[FloatArray] = None

    def validate(self) -> None:
        _validate_int_literal("seq", self.seq, 0, None)
        self._coerce("dx", as_array("dx", self.dx, (3,)))
        _validate_float_literal("dchi", self.dchi)
        if self.P is not None:
            self._coerce("P", as_array("P", self.P, (4, 4)))

    @classmethod
    def between(
        cls,
        seq: int,
        target_x: FloatArray,
        target_chi: float,
        local: TrackState,
        P: Optional[FloatArray] = None,
    ) -> Correction:
        """The correction that moves ``local`` onto the target mean."""
        return cls(
            seq=seq,
            dx=np.asarray(target_x) - local.x,
            dchi=wrap_angle(target_chi - local.chi),
            P=P,
        )

    @property
    def is_zero(self) -> bool:
        return bool(not np.any(self.dx) and self.dchi == 0.0 and self.P is None)


def heading_rotation(chi: float) -> FloatArray:
    return planar_rotation(chi)


def step_jacobian(chi: float, dp: FloatArray) -> FloatArray:
    """Jacobian of [x + R(chi) dp, chi + dpsi] with respect to [x, chi]."""
    c, s = math.cos(chi), math.sin(chi)
    F = np.eye(4)
    F[0, 3] = -s * dp[0] - c * dp[1]
    F[1, 3] = c * dp[0] - s * dp[1]
    return F


def step_noise(chi: float, u: StepUpdate) -> FloatArray:
    """The step covariance rotated into the navigation frame."""
    G = np.eye(4)
    G[:3, :3] = heading_rotation(chi)
    return symmetrize(G @ u.covariance @ G.T)


def dr_propagate(s: TrackState, u: StepUpdate) -> TrackState:
    """
    Advance the track by one step.

    :raises SequencingError: If ``u.seq`` is not ``s.seq + 1``.
    """
    if u.seq != s.seq + 1:
        raise SequencingError(f"step {u.seq} does not follow step {s.seq}")
    F = step_jacobian(s.chi, u.dp)
    return TrackState(
        x=s.x + heading_rotation(s.chi) @ u.dp,
        chi=s.chi + u.dpsi,
        P=symmetrize(F @ s.P @ F.T + step_noise(s.chi, u)),
        seq=u.seq,
    )


def transport(
    x: FloatArray, chi: float, pivot: FloatArray, c: Correction
) -> Tuple[FloatArray, float]:
    """
    Carry a correction issued at an earlier step to a later point of the same
    track: the part of the track after the pivot rotates with the heading
    correction.
    """
    moved = pivot + c.dx + heading_rotation(c.dchi) @ (x - pivot)
    return moved, wrap_angle(chi + c.dchi)


def apply_correction(
    s: TrackState,
    c: Correction,
    history: Optional[Mapping[int, TrackState]] = None,
) -> TrackState:
    """
    Merge a fusion-center correction. A correction for the current step is
    additive; one for an earlier step is transported using the track state
    recorded for that step in ``history``. The covariance of a correction is
    only taken for the current step; carrying it forward needs the steps in
    between, which LocalTracker keeps.

    :raises SequencingError: If the correction is addressed to a future step,
        or to an earlier step with a heading change and no history for it.
    """
    if c.seq > s.seq:
        raise SequencingError(f"correction for step {c.seq} is ahead of step {s.seq}")
    P = c.P if c.P is not None and c.seq == s.seq else s.P
    if c.seq == s.seq or c.dchi == 0.0:
        return TrackState(x=s.x + c.dx, chi=s.chi + c.dchi, P=P, seq=s.seq)
    if history is None or c.seq not in history:
        raise SequencingError(f"no track history for step {c.seq}")
    x, chi = transport(s.x, s.chi, history[c.seq].x, c)
    return TrackState(x=x, chi=chi, P=P, seq=s.seq)


class LocalTracker:
    """
    Agent-side dead reckoning of one foot with a bounded history, so late
    corrections can be transported to the current step.
    """

    def __init__(self, initial: TrackState, history_len: int = 512) -> None:
        _validate_int_literal("history_len", history_len, 1, None)
        self.state = initial
        self.history_len = history_len
        self.history: OrderedDict[int, TrackState] = OrderedDict()
        self.history[initial.seq] = initial
        self.steps: OrderedDict[int, StepUpdate] = OrderedDict()

    def propagate(self, u: StepUpdate) -> TrackState:
        self.state = dr_propagate(self.state, u)
        self.history[self.state.seq] = self.state
        self.steps[u.seq] = u
        while len(self.history) > self.history_len:
            self.history.popitem(last=False)
        while len(self.steps) > self.history_len:
            self.steps.popitem(last=False)
        return self.state

    def correct(self, c: Correction) -> TrackState:
        if c.seq > self.state.seq:
            raise SequencingError(
                f"correction for step {c.seq} is ahead of step {self.state.seq}"
            )
        if c.seq not in self.history:
            raise SequencingError(f"no track history for step {c.seq}")
        pivot = self.history[c.seq].x.copy()
        if c.seq < self.state.seq:
            logger.debug(
                "replaying correction for step %d over steps up to %d", c.seq, self.state.seq
            )
        previous: Optional[TrackState] = None
        for seq, past in list(self.history.items()):
            if seq < c.seq:
                continue
            x, chi = transport(past.x, past.chi, pivot, c)
            if c.P is None:
                P = past.P
            elif previous is None:
                P = c.P
            else:
                # the corrected covariance is carried through the recorded steps
                u = self.steps[seq]
                F = step_jacobian(previous.chi, u.dp)
                P = symmetrize(F @ previous.P @ F.T + step_noise(previous.chi, u))
            previous = self.history[seq] = TrackState(x=x, chi=chi, P=P, seq=seq)
        self.state = self.history[self.state.seq]
        return self.state
