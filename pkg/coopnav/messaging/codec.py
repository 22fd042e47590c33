"""
Fixed-point wire codecs for the two packets exchanged with the fusion center.

Both formats are little-endian ``struct`` layouts; ``docs/wire_format.rst``
documents them field by field.

StepPacket (23 bytes)::

    uint8   foot       foot index within the run
    uint16  seq        step index modulo 2**16
    uint32  t_ms       step time in milliseconds
    int16   dp[3]      displacement, LSB = 10 / 2**15 m
    int16   dpsi       heading change, LSB = pi / 2**15 rad
    uint16  var[4]     log10 of diag(P_p) and P_psipsi over [1e-8, 1e2]

CorrectionPacket (11 bytes)::

    uint8   foot
    uint16  seq
    int16   dx[3]      LSB = 10 / 2**15 m
    int16   dchi       LSB = pi / 2**15 rad
"""

from __future__ import annotations

import logging
import math
import struct
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from coopnav.deadreck import Correction
from coopnav.ins.segmenter import StepUpdate
from coopnav.validation import (
    FloatArray,
    InvalidInputError,
    Validated,
    _validate_int_literal,
)

logger = logging.getLogger(__name__)

STEP_FORMAT = struct.Struct("<BHI3hh4H")
CORRECTION_FORMAT = struct.Struct("<BH3hh")

POSITION_RANGE = 10.0
ANGLE_RANGE = math.pi
LOG_VARIANCE_MIN = -8.0
LOG_VARIANCE_MAX = 2.0

INT16_MIN = -(2**15)
INT16_MAX = 2**15 - 1
UINT16_MAX = 2**16 - 1
SEQ_MODULUS = 2**16

POSITION_LSB = POSITION_RANGE / 2**15
ANGLE_LSB = ANGLE_RANGE / 2**15


def _to_int16(name: str, value: float, lsb: float) -> int:
    code = round(value / lsb)
    if code < INT16_MIN or code > INT16_MAX:
        logger.warning("%s %.6g saturated to the int16 range", name, value)
        code = min(max(code, INT16_MIN), INT16_MAX)
    return int(code)


def _to_log_uint16(name: str, variance: float) -> int:
    if variance <= 0.0:
        return 0
    level = math.log10(variance)
    if level < LOG_VARIANCE_MIN or level > LOG_VARIANCE_MAX:
        logger.warning("%s %.6g saturated to [1e-8, 1e2]", name, variance)
        level = min(max(level, LOG_VARIANCE_MIN), LOG_VARIANCE_MAX)
    span = LOG_VARIANCE_MAX - LOG_VARIANCE_MIN
    return int(round((level - LOG_VARIANCE_MIN) / span * UINT16_MAX))


def _from_log_uint16(code: int) -> float:
    span = LOG_VARIANCE_MAX - LOG_VARIANCE_MIN
    return float(10.0 ** (LOG_VARIANCE_MIN + code / UINT16_MAX * span))


def unwrap_seq(raw: int, reference: Optional[int]) -> int:
    """The full step index closest to ``reference`` with ``raw`` as its low 16 bits."""
    if reference is None:
        return raw
    delta = (raw - reference + SEQ_MODULUS // 2) % SEQ_MODULUS - SEQ_MODULUS // 2
    return max(reference + delta, 0)


@dataclass(frozen=True)
class StepPacket(Validated):
    foot: int
    seq: int
    t_ms: int
    payload: Tuple[int, ...]

    def validate(self) -> None:
        _validate_int_literal("foot", self.foot, 0, 255)
        _validate_int_literal("seq", self.seq, 0, SEQ_MODULUS - 1)
        _validate_int_literal("t_ms", self.t_ms, 0, 2**32 - 1)
        if len(self.payload) != 8:
            raise InvalidInputError(f"payload holds {len(self.payload)} values, expected 8")
        object.__setattr__(self, "payload", tuple(int(v) for v in self.payload))

    def pack(self) -> bytes:
        return STEP_FORMAT.pack(self.foot, self.seq, self.t_ms, *self.payload)

    @classmethod
    def unpack(cls, data: bytes) -> StepPacket:
        if len(data) != STEP_FORMAT.size:
            raise InvalidInputError(
                f"step packet has {len(data)} bytes, expected {STEP_FORMAT.size}"
            )
        foot, seq, t_ms, *payload = STEP_FORMAT.unpack(data)
        return cls(foot=foot, seq=seq, t_ms=t_ms, payload=tuple(payload))


@dataclass(frozen=True)
class CorrectionPacket(Validated):
    foot: int
    seq: int
    payload: Tuple[int, ...]

    def validate(self) -> None:
        _validate_int_literal("foot", self.foot, 0, 255)
        _validate_int_literal("seq", self.seq, 0, SEQ_MODULUS - 1)
        if len(self.payload) != 4:
            raise InvalidInputError(f"payload holds {len(self.payload)} values, expected 4")
        object.__setattr__(self, "payload", tuple(int(v) for v in self.payload))

    def pack(self) -> bytes:
        return CORRECTION_FORMAT.pack(self.foot, self.seq, *self.payload)

    @classmethod
    def unpack(cls, data: bytes) -> CorrectionPacket:
        if len(data) != CORRECTION_FORMAT.size:
            raise InvalidInputError(
                f"correction packet has {len(data)} bytes, expected {CORRECTION_FORMAT.size}"
            )
        foot, seq, *payload = CORRECTION_FORMAT.unpack(data)
        return cls(foot=foot, seq=seq, payload=tuple(payload))


def encode_step(u: StepUpdate, foot: int = 0) -> StepPacket:
    """
    Quantize a step. The position/heading cross-covariance is not sent.
    Out-of-range values saturate with a logged warning.
    """
    t_ms = round(u.t_step * 1000.0)
    if t_ms < 0 or t_ms > 2**32 - 1:
        raise InvalidInputError(f"t_step '{u.t_step}' does not fit the packet clock")
    variances: Sequence[float] = (*np.diag(u.P_p), u.P_psipsi)
    payload = (
        *(_to_int16("dp", float(v), POSITION_LSB) for v in u.dp),
        _to_int16("dpsi", u.dpsi, ANGLE_LSB),
        *(_to_log_uint16("step variance", float(v)) for v in variances),
    )
    return StepPacket(foot=foot, seq=u.seq % SEQ_MODULUS, t_ms=int(t_ms), payload=payload)


def decode_step(packet: StepPacket, last_seq: Optional[int] = None) -> StepUpdate:
    """
    :param last_seq: The last full step index of the foot, used to undo the
        16-bit wrap of ``seq``.
    """
    p = packet.payload
    variances = [_from_log_uint16(code) for code in p[4:]]
    return StepUpdate(
        seq=unwrap_seq(packet.seq, last_seq),
        dp=np.array(p[:3], dtype=float) * POSITION_LSB,
        dpsi=p[3] * ANGLE_LSB,
        P_p=np.diag(variances[:3]),
        P_ppsi=np.zeros(3),
        P_psipsi=variances[3],
        t_step=packet.t_ms / 1000.0,
    )


def encode_correction(c: Correction, foot: int = 0) -> CorrectionPacket:
    payload = (
        *(_to_int16("dx", float(v), POSITION_LSB) for v in c.dx),
        _to_int16("dchi", c.dchi, ANGLE_LSB),
    )
    return CorrectionPacket(foot=foot, seq=c.seq % SEQ_MODULUS, payload=payload)


def decode_correction(
    packet: CorrectionPacket, last_seq: Optional[int] = None
) -> Correction:
    p = packet.payload
    return Correction(
        seq=unwrap_seq(packet.seq, last_seq),
        dx=np.array(p[:3], dtype=float) * POSITION_LSB,
        dchi=p[3] * ANGLE_LSB,
    )


def quantize_step(u: StepUpdate) -> StepUpdate:
    """The step as the fusion center decodes it."""
    return decode_step(encode_step(u), last_seq=u.seq)


def quantize_correction(c: Correction) -> Correction:
    """The correction as the agent decodes it."""
    return decode_correction(encode_correction(c), last_seq=c.seq)


def quantization_step(field: str) -> float:
    """Worst-case absolute decode error of a displacement or angle field."""
    steps = {"dp": POSITION_LSB, "dx": POSITION_LSB, "dpsi": ANGLE_LSB, "dchi": ANGLE_LSB}
    if field not in steps:
        raise InvalidInputError(f"field '{field}' has no fixed quantization step")
    return steps[field] / 2.0


def step_values(u: StepUpdate) -> FloatArray:
    """The 8 transmitted values of a step in full precision."""
    return np.concatenate([u.dp, [u.dpsi], np.diag(u.P_p), [u.P_psipsi]])
