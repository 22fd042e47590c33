"""
Ground-truth foot tracks of the two simulated scenarios.

Every foot steps at ``step_rate``; the right foot of an agent steps half a
period after its left foot and starts half a step ahead, so the two feet
alternate and never drift apart by more than half a step longitudinally.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np

from coopnav.scenarios.config import STATIC_TRIANGLE_ANCHORS, ScenarioConfig, ScenarioKind
from coopnav.validation import FloatArray, InvalidInputError, wrap_angle


def foot_ids(agent: str) -> Tuple[str, str]:
    return f"{agent}.L", f"{agent}.R"


@dataclass(frozen=True, eq=False)
class FootTruth:
    """Pose of one foot before its first step (index 0) and after every step."""

    times: FloatArray
    positions: FloatArray
    headings: FloatArray

    @property
    def steps(self) -> int:
        return len(self.times) - 1

    def index_at(self, t: float) -> int:
        """Index of the last pose reached by time ``t``."""
        return max(int(np.searchsorted(self.times, t, side="right")) - 1, 0)

    def position_at(self, t: float) -> FloatArray:
        return np.array(self.positions[self.index_at(t)])


@dataclass(frozen=True, eq=False)
class TruthTrace:
    feet: Dict[str, FootTruth]
    agents: Dict[str, Tuple[str, str]]
    static: Tuple[str, ...] = ()
    meta: Dict[str, float] = field(default_factory=dict)

    def agent_position(self, agent: str, t: float) -> FloatArray:
        left, right = self.agents[agent]
        return 0.5 * (self.feet[left].position_at(t) + self.feet[right].position_at(t))

    def range_at(self, a: str, b: str, t: float) -> float:
        """Distance between the devices of two agents, carried at the feet midpoint."""
        return float(np.linalg.norm(self.agent_position(a, t) - self.agent_position(b, t)))

    def max_foot_separation(self, agent: str) -> float:
        left, right = (self.feet[f] for f in self.agents[agent])
        times = np.union1d(left.times, right.times)
        return max(
            float(np.linalg.norm(left.position_at(t) - right.position_at(t)))
            for t in times
        )

    def to_dict(self) -> Dict[str, object]:
        return {
            "agents": {a: list(f) for a, f in self.agents.items()},
            "static": list(self.static),
            "feet": {
                foot: {
                    "t": ft.times.tolist(),
                    "x": ft.positions.tolist(),
                    "chi": ft.headings.tolist(),
                }
                for foot, ft in self.feet.items()
            },
        }

    def write(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True))


def _step_times(cfg: ScenarioConfig, offset: float) -> FloatArray:
    period = 1.0 / cfg.step_rate
    return offset * period + period * np.arange(cfg.steps + 1)


def gen_straight_march(cfg: ScenarioConfig) -> TruthTrace:
    """
    Agents walk along +x on parallel lines ``spacing`` apart in y, feet
    ``foot_separation`` apart laterally.
    """
    if cfg.kind is not ScenarioKind.STRAIGHT_MARCH:
        raise InvalidInputError(f"scenario kind '{cfg.kind.value}' is not straight-march")
    feet: Dict[str, FootTruth] = {}
    agents: Dict[str, Tuple[str, str]] = {}
    k = np.arange(cfg.steps + 1)
    for i, agent in enumerate(cfg.agent_ids()):
        left, right = foot_ids(agent)
        agents[agent] = (left, right)
        y = i * cfg.spacing
        for foot, lateral, ahead, offset in (
            (left, 0.5 * cfg.foot_separation, 0.0, 0.0),
            (right, -0.5 * cfg.foot_separation, 0.5 * cfg.step_length, 0.5),
        ):
            positions = np.zeros((cfg.steps + 1, 3))
            positions[:, 0] = ahead + cfg.step_length * k
            positions[:, 1] = y + lateral
            feet[foot] = FootTruth(
                times=_step_times(cfg, offset),
                positions=positions,
                headings=np.zeros(cfg.steps + 1),
            )
    return TruthTrace(feet=feet, agents=agents)


def triangle_vertices(side: float) -> FloatArray:
    """Equilateral triangle centered on the origin."""
    radius = side / math.sqrt(3.0)
    angles = math.pi / 2 + 2 * math.pi * np.arange(3) / 3
    return np.column_stack([radius * np.cos(angles), radius * np.sin(angles), np.zeros(3)])


def gen_static_triangle(cfg: ScenarioConfig) -> TruthTrace:
    """
    Three agents stand still on the vertices of an equilateral triangle; every
    other agent walks counter-clockwise around the circle of ``circle_radius``
    centered on the triangle, the walkers spread evenly over the circle.
    """
    if cfg.kind is not ScenarioKind.STATIC_TRIANGLE:
        raise InvalidInputError(f"scenario kind '{cfg.kind.value}' is not static-triangle")
    feet: Dict[str, FootTruth] = {}
    agents: Dict[str, Tuple[str, str]] = {}
    static: List[str] = []
    ids = cfg.agent_ids()
    vertices = triangle_vertices(cfg.triangle_side)
    walkers = ids[STATIC_TRIANGLE_ANCHORS:]
    k = np.arange(cfg.steps + 1)

    for agent, vertex in zip(ids, vertices):
        left, right = foot_ids(agent)
        agents[agent] = (left, right)
        static.append(agent)
        for foot, lateral, offset in (
            (left, 0.5 * cfg.foot_separation, 0.0),
            (right, -0.5 * cfg.foot_separation, 0.5),
        ):
            position = vertex + np.array([0.0, lateral, 0.0])
            feet[foot] = FootTruth(
                times=_step_times(cfg, offset),
                positions=np.tile(position, (cfg.steps + 1, 1)),
                headings=np.zeros(cfg.steps + 1),
            )

    for j, agent in enumerate(walkers):
        left, right = foot_ids(agent)
        agents[agent] = (left, right)
        phase = 2 * math.pi * j / len(walkers)
        for foot, lateral, ahead, offset in (
            (left, 0.5 * cfg.foot_separation, 0.0, 0.0),
            (right, -0.5 * cfg.foot_separation, 0.5 * cfg.step_length, 0.5),
        ):
            arc = ahead + cfg.step_length * k
            theta = phase + arc / cfg.circle_radius
            # counter-clockwise walking puts the left foot on the inside
            r = cfg.circle_radius - lateral
            positions = np.column_stack(
                [r * np.cos(theta), r * np.sin(theta), np.zeros_like(theta)]
            )
            headings = np.array([wrap_angle(t + math.pi / 2) for t in theta])
            feet[foot] = FootTruth(
                times=_step_times(cfg, offset),
                positions=positions,
                headings=headings,
            )
    return TruthTrace(
        feet=feet,
        agents=agents,
        static=tuple(static),
        meta={"steps_per_lap": math.ceil(2 * math.pi * cfg.circle_radius / cfg.step_length)},
    )


def generate_truth(cfg: ScenarioConfig) -> TruthTrace:
    if cfg.kind is ScenarioKind.STRAIGHT_MARCH:
        return gen_straight_march(cfg)
    return gen_static_triangle(cfg)
