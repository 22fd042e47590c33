from __future__ import annotations

import math
from typing import Mapping, Optional, Sequence

import numpy as np

from coopnav.config.run_config import RunConfig
from coopnav.deadreck import TrackState
from coopnav.fusion.center import FusionMode
from coopnav.fusion.estimate import GlobalEstimate
from coopnav.ins.segmenter import StepUpdate
from coopnav.messaging.network import NetworkConfig
from coopnav.scenarios.config import MonteCarloConfig, ScenarioConfig, ScenarioKind


# Builders for the value types, so tests only spell out what they care about
def make_step(
    seq: int,
    dp: Sequence[float] = (1.0, 0.0, 0.0),
    dpsi: float = 0.0,
    sigma_dp: float = 0.01,
    sigma_dpsi: float = math.radians(0.2),
    t_step: Optional[float] = None,
) -> StepUpdate:
    return StepUpdate(
        seq=seq,
        dp=np.array(dp, dtype=float),
        dpsi=dpsi,
        P_p=np.eye(3) * sigma_dp**2,
        P_ppsi=np.zeros(3),
        P_psipsi=sigma_dpsi**2,
        t_step=float(seq) if t_step is None else t_step,
    )


def make_track(
    x: Sequence[float] = (0.0, 0.0, 0.0),
    chi: float = 0.0,
    position_var: float = 1e-6,
    heading_var: float = 1e-8,
    seq: int = 0,
) -> TrackState:
    return TrackState(
        x=np.array(x, dtype=float),
        chi=chi,
        P=np.diag([position_var] * 3 + [heading_var]),
        seq=seq,
    )


def make_estimate(
    positions: Mapping[str, Sequence[float]],
    position_var: float = 1.0,
    heading_var: float = 1e-4,
) -> GlobalEstimate:
    """Independent feet at the given positions, all headings zero."""
    return GlobalEstimate.from_tracks(
        {
            foot: make_track(x, position_var=position_var, heading_var=heading_var)
            for foot, x in positions.items()
        }
    )


def scenario_config(
    kind: ScenarioKind = ScenarioKind.STRAIGHT_MARCH,
    agents: int = 2,
    steps: int = 20,
    fusion_mode: FusionMode = FusionMode.COOPERATIVE,
    **overrides: object,
) -> ScenarioConfig:
    return ScenarioConfig(
        kind=kind, agents=agents, steps=steps, fusion_mode=fusion_mode, **overrides  # type: ignore
    )


def random_scenario(rng: np.random.Generator) -> ScenarioConfig:
    kind = ScenarioKind.STATIC_TRIANGLE if rng.random() < 0.5 else ScenarioKind.STRAIGHT_MARCH
    return scenario_config(
        kind,
        agents=int(rng.integers(4 if kind is ScenarioKind.STATIC_TRIANGLE else 1, 7)),
        steps=int(rng.integers(1, 20)),
        sigma_dp=float(rng.uniform(0.0, 0.05)),
        cauchy_scale=float(rng.uniform(0.0, 2.0)),
        range_rate=float(rng.uniform(0.5, 4.0)),
    )


def run_config(
    scenario: Optional[ScenarioConfig] = None,
    network: Optional[NetworkConfig] = None,
    runs: int = 1,
    seed: int = 0,
    output_directory: str = "out",
) -> RunConfig:
    return RunConfig(
        scenario=scenario or scenario_config(),
        network=network or NetworkConfig(),
        montecarlo=MonteCarloConfig(runs=runs, seed=seed),
        output_directory=output_directory,
    )


def random_estimate(
    rng: np.random.Generator,
    feet: Sequence[str],
    spread: float = 10.0,
    position_sd: float = 1.0,
    heading_sd: float = 0.05,
) -> GlobalEstimate:
    """A joint estimate with a random, fully correlated and well-conditioned covariance."""
    n = 4 * len(feet)
    A = rng.normal(size=(n, n))
    S = np.diag(np.tile([position_sd] * 3 + [heading_sd], len(feet)))
    P = S @ (A @ A.T / n + 0.1 * np.eye(n)) @ S
    mean = rng.uniform(-spread, spread, size=n)
    mean[3::4] = rng.uniform(-3.0, 3.0, size=len(feet))
    return GlobalEstimate(ids=tuple(feet), mean=mean, P=0.5 * (P + P.T))


def assert_covariance(P: np.ndarray) -> None:
    scale = max(float(np.abs(P).max()), 1e-300)
    assert np.all(np.isfinite(P))
    assert np.abs(P - P.T).max() <= 1e-12 * scale
    assert np.linalg.eigvalsh(P).min() >= -1e-9 * scale


MARCH_CONFIG = """
[scenario]
kind = straight-march
agents = 2
steps = 20

[ranging]
cauchy_scale = 0.5

[montecarlo]
runs = 2
seed = 7
"""
