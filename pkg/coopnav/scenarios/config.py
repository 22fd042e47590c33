from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Tuple

from coopnav.fusion.center import FusionMode
from coopnav.validation import (
    InvalidInputError,
    Validated,
    _validate_float_literal,
    _validate_int_literal,
)


class ScenarioKind(Enum):
    STRAIGHT_MARCH = "straight-march"
    STATIC_TRIANGLE = "static-triangle"


STATIC_TRIANGLE_ANCHORS = 3


@dataclass(frozen=True)
class ScenarioConfig(Validated):
    """
    :param steps: Steps taken by each foot of a walking agent.
    :param sigma_dpsi: Heading-change noise in radians.
    :param cauchy_scale: Scale of the Cauchy ranging error in meters.
    :param range_rate: Aggregate round-robin ranging rate in Hz.
    """

    kind: ScenarioKind
    agents: int
    steps: int
    spacing: float = 10.0
    step_length: float = 1.0
    step_rate: float = 1.0
    foot_separation: float = 0.3
    sigma_dp: float = 0.01
    sigma_dpsi: float = math.radians(0.2)
    cauchy_scale: float = 1.0
    range_rate: float = 1.0
    triangle_side: float = 20.0
    circle_radius: float = 20.0
    fusion_mode: FusionMode = FusionMode.COOPERATIVE

    def validate(self) -> None:
        object.__setattr__(self, "kind", ScenarioKind(self.kind))
        object.__setattr__(self, "fusion_mode", FusionMode(self.fusion_mode))
        minimum = STATIC_TRIANGLE_ANCHORS + 1 if self.kind is ScenarioKind.STATIC_TRIANGLE else 1
        _validate_int_literal("agents", self.agents, minimum, 255 // 2)
        _validate_int_literal("steps", self.steps, 1, None)
        _validate_float_literal("spacing", self.spacing, 0.0, strict=True)
        _validate_float_literal("step_length", self.step_length, 0.0, strict=True)
        _validate_float_literal("step_rate", self.step_rate, 0.0, strict=True)
        _validate_float_literal("foot_separation", self.foot_separation, 0.0)
        _validate_float_literal("sigma_dp", self.sigma_dp, 0.0)
        _validate_float_literal("sigma_dpsi", self.sigma_dpsi, 0.0)
        _validate_float_literal("cauchy_scale", self.cauchy_scale, 0.0)
        _validate_float_literal("range_rate", self.range_rate, 0.0, strict=True)
        _validate_float_literal("triangle_side", self.triangle_side, 0.0, strict=True)
        _validate_float_literal("circle_radius", self.circle_radius, 0.0, strict=True)
        if (
            self.kind is ScenarioKind.STATIC_TRIANGLE
            and self.circle_radius <= self.triangle_side / math.sqrt(3.0)
        ):
            raise InvalidInputError(
                "circle_radius must exceed the triangle circumradius so the circle "
                "encloses the static agents"
            )

    @property
    def duration(self) -> float:
        return self.steps / self.step_rate

    @property
    def distance(self) -> float:
        return self.steps * self.step_length

    def agent_ids(self) -> List[str]:
        return [f"a{i}" for i in range(self.agents)]


@dataclass(frozen=True)
class MonteCarloConfig(Validated):
    runs: int = 1
    seed: int = 0
    workers: int = 1
    agents_sweep: Tuple[int, ...] = ()

    def validate(self) -> None:
        _validate_int_literal("runs", self.runs, 1, None)
        _validate_int_literal("seed", self.seed, 0, None)
        _validate_int_literal("workers", self.workers, 1, None)
        sweep = tuple(self.agents_sweep)
        for n in sweep:
            _validate_int_literal("agents_sweep entry", n, 1, None)
        object.__setattr__(self, "agents_sweep", sweep)
