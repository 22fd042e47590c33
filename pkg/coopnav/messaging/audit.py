"""
Byte accounting of the decentralized architecture against a baseline that
ships every raw IMU sample to a central filter.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Dict, Tuple

from coopnav.validation import (
    InvalidInputError,
    _validate_float_literal,
    _validate_int_literal,
)

SCHEMA_VERSION = 1

# error-state dimension of the per-foot filter and of the dead-reckoning state
INS_STATE_DIM = 9
DR_STATE_DIM = 4


@dataclass
class CommAudit:
    """
    :param imu_rate: IMU sample rate in Hz.
    :param values_per_sample: Values per IMU sample in the baseline.
    :param bytes_per_value: Width of one baseline value.
    """

    imu_rate: float = 200.0
    values_per_sample: int = 6
    bytes_per_value: int = 2
    links: Dict[Tuple[str, str, str], int] = field(default_factory=lambda: defaultdict(int))
    baseline_bytes: int = 0
    steps: int = 0
    duration: float = 0.0
    feet: int = 0

    def __post_init__(self) -> None:
        _validate_float_literal("imu_rate", self.imu_rate, 0.0, strict=True)
        _validate_int_literal("values_per_sample", self.values_per_sample, 1, None)
        _validate_int_literal("bytes_per_value", self.bytes_per_value, 1, None)
        self.links = defaultdict(int, self.links)

    def record(self, agent: str, direction: str, kind: str, nbytes: int) -> None:
        if nbytes < 0:
            raise InvalidInputError(f"nbytes '{nbytes}' must be at least 0")
        self.links[(agent, direction, kind)] += nbytes
        if kind == "step":
            self.steps += 1

    def record_imu(self, seconds: float, feet: int = 1) -> None:
        """Add the baseline traffic of ``feet`` IMUs streaming for ``seconds``."""
        if seconds < 0 or feet < 0:
            raise InvalidInputError("baseline time and foot count must be at least 0")
        samples = round(seconds * self.imu_rate) * feet
        self.baseline_bytes += samples * self.values_per_sample * self.bytes_per_value
        self.duration = max(self.duration, seconds)
        self.feet += feet

    @property
    def decentralized_bytes(self) -> int:
        return sum(self.links.values())

    def tier_bytes(self) -> Dict[str, int]:
        tiers: Dict[str, int] = defaultdict(int)
        for (_, direction, kind), nbytes in self.links.items():
            tiers[f"{direction}:{kind}"] += nbytes
        return dict(sorted(tiers.items()))


@dataclass(frozen=True)
class AuditReport:
    ratio: float
    baseline_bytes: int
    decentralized_bytes: int
    tiers: Dict[str, int]
    per_link: Dict[str, int]
    step_rate: float
    compute_ratio: float

    def to_dict(self) -> Dict[str, Any]:
        def finite(x: float) -> Any:
            return x if math.isfinite(x) else "inf"

        return {
            "schema_version": SCHEMA_VERSION,
            "ratio": finite(self.ratio),
            "baseline_bytes": self.baseline_bytes,
            "decentralized_bytes": self.decentralized_bytes,
            "tiers": self.tiers,
            "per_link": self.per_link,
            "step_rate": self.step_rate,
            "compute_ratio": finite(self.compute_ratio),
        }

    def serialize(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def audit_report(audit: CommAudit) -> AuditReport:
    """
    Bandwidth ratio of the baseline to the decentralized traffic (infinite when
    nothing was sent) and the ratio of central processing load, which scales
    with the update rate times the cube of the state dimension.
    """
    sent = audit.decentralized_bytes
    ratio = audit.baseline_bytes / sent if sent else math.inf
    step_rate = (
        audit.steps / (audit.duration * max(audit.feet, 1)) if audit.duration > 0 else 0.0
    )
    compute_ratio = (
        audit.imu_rate / step_rate * (INS_STATE_DIM / DR_STATE_DIM) ** 3
        if step_rate > 0
        else math.inf
    )
    per_link: Dict[str, int] = defaultdict(int)
    for (agent, direction, _), nbytes in audit.links.items():
        per_link[f"{agent}:{direction}"] += nbytes
    return AuditReport(
        ratio=ratio,
        baseline_bytes=audit.baseline_bytes,
        decentralized_bytes=sent,
        tiers=audit.tier_bytes(),
        per_link=dict(sorted(per_link.items())),
        step_rate=step_rate,
        compute_ratio=compute_ratio,
    )
