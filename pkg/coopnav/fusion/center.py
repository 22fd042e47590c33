from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from coopnav.deadreck import (
    Correction,
    SequencingError,
    TrackState,
    apply_correction,
    dr_propagate,
    heading_rotation,
    step_jacobian,
    step_noise,
)
from coopnav.fusion.constraint import constraint_update
from coopnav.fusion.estimate import (
    ConstraintParams,
    GlobalEstimate,
    RangeMeasurement,
    RangeParams,
    UnknownFootError,
)
from coopnav.fusion.ranging import AuxKind, aux_update, range_update
from coopnav.ins.segmenter import StepUpdate
from coopnav.linalg import symmetrize
from coopnav.validation import FloatArray, InvalidInputError

logger = logging.getLogger(__name__)


class FusionMode(Enum):
    DEAD_RECKONING = "dead-reckoning"
    CONSTRAINT = "constraint"
    COOPERATIVE = "cooperative"


def propagate_foot(g: GlobalEstimate, foot: str, u: StepUpdate) -> GlobalEstimate:
    """
    Dead reckoning of one foot inside the joint estimate. Cross-covariances
    with every other foot go through the same step Jacobian.

    :raises SequencingError: If ``u.seq`` does not follow the last step of the foot.
    """
    j = g.index(foot)
    if u.seq != g.seqs[j] + 1:
        raise SequencingError(
            f"step {u.seq} of foot '{foot}' does not follow step {g.seqs[j]}"
        )
    blk = g.block(foot)
    x = g.mean[blk][:3]
    chi = float(g.mean[blk][3])
    F = step_jacobian(chi, u.dp)

    mean = np.array(g.mean)
    mean[blk] = np.append(x + heading_rotation(chi) @ u.dp, chi + u.dpsi)
    P = np.array(g.P)
    P[blk, :] = F @ P[blk, :]
    P[:, blk] = P[:, blk] @ F.T
    P[blk, blk] += step_noise(chi, u)

    seqs = list(g.seqs)
    times = list(g.times)
    seqs[j] = u.seq
    times[j] = u.t_step
    return replace(g, mean=mean, P=symmetrize(P), seqs=tuple(seqs), times=tuple(times))


def ingest_step_update(
    g: GlobalEstimate,
    foot: str,
    u: StepUpdate,
    cp: Optional[ConstraintParams] = None,
    partner: Optional[str] = None,
    local: Optional[TrackState] = None,
) -> Tuple[GlobalEstimate, Correction]:
    """
    Take one step of a foot into the joint estimate, constrain it against the
    other foot of the same agent and return the correction for the agent.

    :param partner: The other foot of the agent; no constraint when omitted.
    :param local: The agent's own prediction for this step. Defaults to dead
        reckoning the foot's current block of the joint estimate.
    :returns: The updated estimate and the correction (central minus local).
    """
    prediction = local if local is not None else dr_propagate(g.track(foot), u)
    g = propagate_foot(g, foot, u)
    if partner is not None:
        dt_ab = u.t_step - g.times[g.index(partner)]
        g = constraint_update(g, foot, partner, cp or ConstraintParams(), dt_ab)
    correction = Correction.between(
        u.seq, g.position(foot), g.heading(foot), prediction
    )
    return g, correction


@dataclass
class FusionStats:
    steps: int = 0
    constraints_active: int = 0
    ranges_accepted: int = 0
    ranges_rejected: int = 0
    aux_accepted: int = 0
    aux_rejected: int = 0


CorrectionQuantizer = Callable[[Correction], Correction]


class FusionCenter:
    """
    Owner of the joint estimate. Keeps, per foot, a mirror of the agent's
    local track so every correction is expressed against exactly what the
    agent holds.

    :param quantize: Applied to every outgoing correction before the mirror is
        updated, so the mirror follows what the agent decodes.
    :param send_covariance: Attach the central covariance block to corrections.
    """

    def __init__(
        self,
        tracks: Mapping[str, TrackState],
        agents: Mapping[str, Sequence[str]],
        cp: Optional[ConstraintParams] = None,
        rp: Optional[RangeParams] = None,
        mode: Union[FusionMode, str] = FusionMode.COOPERATIVE,
        quantize: Optional[CorrectionQuantizer] = None,
        send_covariance: bool = False,
    ) -> None:
        self.estimate = GlobalEstimate.from_tracks(tracks)
        self.cp = cp or ConstraintParams()
        self.rp = rp or RangeParams()
        self.mode = FusionMode(mode)
        self.quantize = quantize
        self.send_covariance = send_covariance
        self.mirrors: Dict[str, TrackState] = dict(tracks)
        self.agents: Dict[str, Tuple[str, ...]] = {}
        self.agent_of: Dict[str, str] = {}
        for agent, feet in agents.items():
            feet = tuple(feet)
            for foot in feet:
                if foot not in self.mirrors:
                    raise UnknownFootError(f"foot '{foot}' of agent '{agent}' has no track")
                self.agent_of[foot] = agent
            self.agents[agent] = feet
        self.last_foot: Dict[str, str] = {}
        self.stats = FusionStats()

    def partner(self, foot: str) -> Optional[str]:
        agent = self.agent_of.get(foot)
        if agent is None:
            return None
        others = [f for f in self.agents[agent] if f != foot]
        return others[0] if others else None

    def ingest(self, foot: str, u: StepUpdate) -> Dict[str, Correction]:
        """
        Take one step into the joint estimate.

        :returns: The corrections to send, keyed by foot: always one for the
            stepping foot, and one for its partner when the constraint moved
            the partner's central block away from its mirror.
        """
        if foot not in self.mirrors:
            raise UnknownFootError(f"foot '{foot}' is not tracked")
        mirror = dr_propagate(self.mirrors[foot], u)
        partner = None if self.mode is FusionMode.DEAD_RECKONING else self.partner(foot)
        before = self.estimate
        self.estimate, correction = ingest_step_update(
            self.estimate, foot, u, self.cp, partner, local=mirror
        )
        self.stats.steps += 1
        corrections = {foot: self._send(foot, mirror, correction)}
        if partner is not None and self._constrained(before, foot):
            self.stats.constraints_active += 1
            held = self.mirrors[partner]
            follow = Correction.between(
                held.seq,
                self.estimate.position(partner),
                self.estimate.heading(partner),
                held,
            )
            follow = self._send(partner, held, follow)
            if not follow.is_zero:
                corrections[partner] = follow
        if foot in self.agent_of:
            self.last_foot[self.agent_of[foot]] = foot
        return corrections

    def _send(self, foot: str, mirror: TrackState, correction: Correction) -> Correction:
        # what leaves the center is what the mirror takes
        if self.send_covariance:
            correction = replace(correction, P=self.estimate.track(foot).P)
        if self.quantize is not None:
            correction = self.quantize(correction)
        self.mirrors[foot] = apply_correction(mirror, correction)
        return correction

    def _constrained(self, before: GlobalEstimate, foot: str) -> bool:
        # the partner block only moves when the constraint was active
        partner = self.partner(foot)
        assert partner is not None
        blk = before.block(partner)
        return not np.array_equal(before.mean[blk], self.estimate.mean[blk])

    def resolve(self, name: str) -> str:
        """The foot standing in for ``name``, which is a foot or an agent."""
        if name in self.mirrors:
            return name
        if name in self.agents:
            return self.last_foot.get(name, self.agents[name][0])
        raise UnknownFootError(f"'{name}' is neither a tracked foot nor an agent")

    def _asynchrony(self, t: float, *feet: str) -> float:
        g = self.estimate
        return max(abs(t - g.times[g.index(f)]) for f in feet)

    def range(self, m: RangeMeasurement) -> bool:
        """
        Fuse an inter-agent range. Agents are resolved to their most recently
        updated foot and gamma_r grows with the time since those feet stepped.

        :returns: Whether the measurement was fused.
        """
        if self.mode is not FusionMode.COOPERATIVE:
            return False
        a = self.resolve(m.a)
        if m.to_fixed_point:
            resolved = replace(m, a=a)
            feet: Tuple[str, ...] = (a,)
        else:
            b = self.resolve(str(m.b))
            if a == b:
                raise InvalidInputError(f"range endpoints both resolve to foot '{a}'")
            resolved = replace(m, a=a, b=b)
            feet = (a, b)
        rp = self.rp.inflated(self.cp.v_max * self._asynchrony(m.t, *feet))
        logger.debug("range %s at t=%.3f, gamma_r %.3f", "-".join(feet), m.t, rp.gamma_r)
        before = self.estimate
        self.estimate = range_update(before, resolved, rp)
        accepted = self.estimate is not before
        if accepted:
            self.stats.ranges_accepted += 1
        else:
            self.stats.ranges_rejected += 1
        return accepted

    def aux(
        self,
        kind: Union[AuxKind, str],
        name: str,
        datum: Union[str, float, FloatArray],
        r_tilde: float = 0.0,
        t: Optional[float] = None,
    ) -> bool:
        foot = self.resolve(name)
        if isinstance(datum, str):
            datum = self.resolve(datum)
        rp = self.rp
        if t is not None:
            rp = rp.inflated(self.cp.v_max * self._asynchrony(t, foot))
        before = self.estimate
        self.estimate = aux_update(before, kind, foot, datum, rp, r_tilde)
        accepted = self.estimate is not before
        if accepted:
            self.stats.aux_accepted += 1
        else:
            self.stats.aux_rejected += 1
        return accepted

    def agent_position(self, agent: str) -> FloatArray:
        """Midpoint of the agent's feet."""
        feet = self.agents[agent]
        return np.mean([self.estimate.position(f) for f in feet], axis=0)
