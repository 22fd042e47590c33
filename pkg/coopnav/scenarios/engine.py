"""
One end-to-end run: truth, synthetic steps and ranges, the simulated network,
agent-side dead reckoning and the fusion center.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from coopnav.deadreck import LocalTracker, TrackState
from coopnav.fusion.center import FusionCenter, FusionStats
from coopnav.fusion.estimate import GlobalEstimate, RangeMeasurement
from coopnav.ins.segmenter import StepUpdate
from coopnav.messaging.audit import AuditReport, CommAudit, audit_report
from coopnav.messaging.codec import (
    CorrectionPacket,
    StepPacket,
    decode_correction,
    decode_step,
    encode_correction,
    encode_step,
    quantize_correction,
    quantize_step,
)
from coopnav.messaging.network import Delivery, Direction, SimNetwork
from coopnav.messaging.schedule import ranging_schedule
from coopnav.scenarios.synth import synth_ranges, synth_step_updates
from coopnav.scenarios.truth import TruthTrace, generate_truth

if TYPE_CHECKING:
    from coopnav.config.run_config import RunConfig

logger = logging.getLogger(__name__)

INITIAL_POSITION_VAR = 1e-6
INITIAL_HEADING_VAR = 1e-8

STEP_EVENT = 0
RANGE_EVENT = 1


class _Event(NamedTuple):
    t: float
    kind: int
    order: int
    foot: str
    step: Optional[StepUpdate]
    measurement: Optional[RangeMeasurement]


@dataclass(frozen=True)
class TrajectoryRow:
    agent: str
    seq: int
    t: float
    estimate: Tuple[float, ...]
    truth: Tuple[float, ...]


@dataclass
class RunResult:
    """
    ``errors`` holds, per agent, the central estimate of the feet midpoint minus
    the truth, taken each time the left foot's step k is fused (row k - 1).
    Rows of steps that never reached the fusion center are NaN.
    ``local_errors`` is the same for the agent's own tracks.
    """

    truth: TruthTrace
    errors: Dict[str, np.ndarray]
    local_errors: Dict[str, np.ndarray]
    trajectory: List[TrajectoryRow]
    stats: FusionStats
    audit: AuditReport
    estimate: GlobalEstimate
    local_tracks: Dict[str, TrackState]
    mirrors: Dict[str, TrackState]
    trace: List[str] = field(default_factory=list)


def initial_tracks(truth: TruthTrace) -> Dict[str, TrackState]:
    P = np.diag([INITIAL_POSITION_VAR] * 3 + [INITIAL_HEADING_VAR])
    return {
        foot: TrackState(x=ft.positions[0], chi=float(ft.headings[0]), P=P, seq=0)
        for foot, ft in truth.feet.items()
    }


class ScenarioRun:
    """Event loop of one run. Steps and ranges are processed in time order."""

    def __init__(self, cfg: RunConfig, seed: int) -> None:
        self.cfg = cfg
        scenario = cfg.scenario
        step_seq, range_seq, net_seq = np.random.SeedSequence(seed).spawn(3)
        self.truth = generate_truth(scenario)
        self.steps = synth_step_updates(
            self.truth, scenario, np.random.default_rng(step_seq)
        )
        self.ranges: List[RangeMeasurement] = []
        if len(self.truth.agents) >= 2:
            schedule = ranging_schedule(
                list(self.truth.agents), scenario.range_rate, scenario.duration
            )
            self.ranges = synth_ranges(
                self.truth, scenario, schedule, np.random.default_rng(range_seq)
            )

        tracks = initial_tracks(self.truth)
        self.center = FusionCenter(
            tracks,
            self.truth.agents,
            cfg.constraint,
            cfg.ranging,
            scenario.fusion_mode,
            quantize=quantize_correction,
        )
        self.trackers = {foot: LocalTracker(t) for foot, t in tracks.items()}
        self.foot_index = {foot: i for i, foot in enumerate(self.center.estimate.ids)}
        self.foot_by_index = {i: foot for foot, i in self.foot_index.items()}
        self.agent_of = {f: a for a, feet in self.truth.agents.items() for f in feet}

        self.audit = CommAudit(imu_rate=cfg.imu_rate)
        network_seed = int(net_seq.generate_state(1)[0])
        self.network = SimNetwork(cfg.network_with_seed(network_seed), self.audit)

        self.expected: Dict[str, int] = {foot: 1 for foot in tracks}
        self.backlog: Dict[str, Dict[int, StepUpdate]] = {foot: {} for foot in tracks}
        rows = scenario.steps
        self.errors = {a: np.full((rows, 3), np.nan) for a in self.truth.agents}
        self.local_errors = {a: np.full((rows, 3), np.nan) for a in self.truth.agents}
        self.trajectory: List[TrajectoryRow] = []

    def _events(self) -> List[_Event]:
        events: List[_Event] = []
        for foot in sorted(self.steps):
            for u in self.steps[foot]:
                events.append(_Event(u.t_step, STEP_EVENT, len(events), foot, u, None))
        for m in self.ranges:
            events.append(_Event(m.t, RANGE_EVENT, len(events), "", None, m))
        events.sort(key=lambda e: (e.t, e.kind, e.order))
        return events

    def run(self) -> RunResult:
        for event in self._events():
            self._deliver_until(event.t)
            if event.step is not None:
                self._agent_step(event.foot, event.step, event.t)
            elif event.measurement is not None:
                self.center.range(event.measurement)
        while self.network.pending:
            next_t = self.network.next_time()
            assert next_t is not None
            self._deliver_until(next_t)
        self.audit.record_imu(self.cfg.scenario.duration, feet=len(self.trackers))

        return RunResult(
            truth=self.truth,
            errors=self.errors,
            local_errors=self.local_errors,
            trajectory=self.trajectory,
            stats=self.center.stats,
            audit=audit_report(self.audit),
            estimate=self.center.estimate,
            local_tracks={f: tr.state for f, tr in self.trackers.items()},
            mirrors=dict(self.center.mirrors),
            trace=self.network.trace_lines(),
        )

    def _agent_step(self, foot: str, u: StepUpdate, t: float) -> None:
        # the agent dead-reckons with the step exactly as the center will decode it
        self.trackers[foot].propagate(quantize_step(u))
        packet = encode_step(u, self.foot_index[foot])
        self.network.send(self.agent_of[foot], Direction.UP, "step", u.seq, packet.pack(), t)
        left, _ = self.truth.agents[self.agent_of[foot]]
        if foot == left:
            agent = self.agent_of[foot]
            local = np.mean(
                [self.trackers[f].state.x for f in self.truth.agents[agent]], axis=0
            )
            self.local_errors[agent][u.seq - 1] = local - self.truth.agent_position(agent, t)

    def _deliver_until(self, t: float) -> None:
        while True:
            next_t = self.network.next_time()
            if next_t is None or next_t > t:
                return
            for delivery in self.network.pop_until(next_t):
                self._handle(delivery)

    def _handle(self, delivery: Delivery) -> None:
        message = delivery.message
        if message.direction is Direction.UP:
            packet = StepPacket.unpack(message.payload)
            foot = self.foot_by_index[packet.foot]
            u = decode_step(packet, last_seq=self.expected[foot] - 1)
            self._ingest(foot, u, delivery.t)
        else:
            cpacket = CorrectionPacket.unpack(message.payload)
            foot = self.foot_by_index[cpacket.foot]
            tracker = self.trackers[foot]
            tracker.correct(decode_correction(cpacket, last_seq=tracker.state.seq))

    def _ingest(self, foot: str, u: StepUpdate, t: float) -> None:
        if u.seq != self.expected[foot]:
            logger.warning(
                "step %d of %s arrived while waiting for step %d", u.seq, foot, self.expected[foot]
            )
        self.backlog[foot][u.seq] = u
        while self.expected[foot] in self.backlog[foot]:
            ready = self.backlog[foot].pop(self.expected[foot])
            self.expected[foot] += 1
            for target, correction in self.center.ingest(foot, ready).items():
                packet = encode_correction(correction, self.foot_index[target])
                self.network.send(
                    self.agent_of[target],
                    Direction.DOWN,
                    "correction",
                    correction.seq,
                    packet.pack(),
                    t,
                )
            self._record(foot, ready)

    def _record(self, foot: str, u: StepUpdate) -> None:
        agent = self.agent_of[foot]
        if foot != self.truth.agents[agent][0]:
            return
        estimate = self.center.agent_position(agent)
        truth = self.truth.agent_position(agent, u.t_step)
        self.errors[agent][u.seq - 1] = estimate - truth
        self.trajectory.append(
            TrajectoryRow(
                agent=agent,
                seq=u.seq,
                t=u.t_step,
                estimate=tuple(float(v) for v in estimate),
                truth=tuple(float(v) for v in truth),
            )
        )


def run_scenario(cfg: RunConfig, seed: Optional[int] = None) -> RunResult:
    """
    :param seed: Seed of this run; ``cfg.montecarlo.seed`` when omitted.
    """
    return ScenarioRun(cfg, cfg.montecarlo.seed if seed is None else seed).run()
