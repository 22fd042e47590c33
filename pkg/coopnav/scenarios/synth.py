"""
Step- and range-level measurement synthesis.

Steps are the true body-frame increments plus independent Gaussian errors
whose covariances are also what the steps report. Feet of static agents report
standstill steps whose tiny noise reflects a locked navigator. Ranges are the
true device distances plus Cauchy errors.
"""

from __future__ import annotations

from typing import Dict, List, Sequence, Tuple

import numpy as np

from coopnav.deadreck import heading_rotation
from coopnav.fusion.estimate import RangeMeasurement
from coopnav.ins.segmenter import StepUpdate
from coopnav.messaging.schedule import RangeSlot
from coopnav.scenarios.config import ScenarioConfig
from coopnav.scenarios.truth import TruthTrace
from coopnav.validation import wrap_angle

STANDSTILL_SIGMA_DP = 1e-3
STANDSTILL_SIGMA_DPSI = 1e-4


def true_increments(truth: TruthTrace, foot: str) -> List[Tuple[np.ndarray, float]]:
    """Body-frame displacement and heading change of every step of ``foot``."""
    ft = truth.feet[foot]
    out = []
    for k in range(1, ft.steps + 1):
        dp = heading_rotation(ft.headings[k - 1]).T @ (ft.positions[k] - ft.positions[k - 1])
        dpsi = wrap_angle(float(ft.headings[k] - ft.headings[k - 1]))
        out.append((dp, dpsi))
    return out


def synth_step_updates(
    truth: TruthTrace, cfg: ScenarioConfig, rng: np.random.Generator
) -> Dict[str, List[StepUpdate]]:
    """
    :returns: Per foot, its StepUpdates in order, seq starting at 1.
    """
    static_feet = {f for agent in truth.static for f in truth.agents[agent]}
    streams: Dict[str, List[StepUpdate]] = {}
    for foot in sorted(truth.feet):
        ft = truth.feet[foot]
        if foot in static_feet:
            sigma_dp, sigma_dpsi = STANDSTILL_SIGMA_DP, STANDSTILL_SIGMA_DPSI
        else:
            sigma_dp, sigma_dpsi = cfg.sigma_dp, cfg.sigma_dpsi
        increments = true_increments(truth, foot)
        dp_noise = rng.normal(0.0, 1.0, size=(len(increments), 3)) * sigma_dp
        dpsi_noise = rng.normal(0.0, 1.0, size=len(increments)) * sigma_dpsi
        streams[foot] = [
            StepUpdate(
                seq=k + 1,
                dp=dp + dp_noise[k],
                dpsi=dpsi + dpsi_noise[k],
                P_p=np.eye(3) * sigma_dp**2,
                P_ppsi=np.zeros(3),
                P_psipsi=sigma_dpsi**2,
                t_step=float(ft.times[k + 1]),
            )
            for k, (dp, dpsi) in enumerate(increments)
        ]
    return streams


def synth_ranges(
    truth: TruthTrace,
    cfg: ScenarioConfig,
    schedule: Sequence[RangeSlot],
    rng: np.random.Generator,
) -> List[RangeMeasurement]:
    """
    Ranges of the scheduled agent pairs with Cauchy errors. A measurement cannot
    be negative, so errors that would make it so are clipped at zero.
    """
    errors = rng.standard_cauchy(size=len(schedule)) * cfg.cauchy_scale
    return [
        RangeMeasurement(
            a=slot.a,
            b=slot.b,
            r_tilde=max(truth.range_at(slot.a, slot.b, slot.t) + float(e), 0.0),
            t=slot.t,
        )
        for slot, e in zip(schedule, errors)
    ]
