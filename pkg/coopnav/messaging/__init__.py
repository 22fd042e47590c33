from coopnav.messaging.audit import AuditReport, CommAudit, audit_report
from coopnav.messaging.codec import (
    CorrectionPacket,
    StepPacket,
    decode_correction,
    decode_step,
    encode_correction,
    encode_step,
    quantization_step,
    quantize_correction,
    quantize_step,
)
from coopnav.messaging.network import (
    Delivery,
    Direction,
    Message,
    NetworkConfig,
    SimNetwork,
)
from coopnav.messaging.schedule import RangeSlot, iter_slots, ranging_schedule

__all__ = [
    "AuditReport",
    "CommAudit",
    "CorrectionPacket",
    "Delivery",
    "Direction",
    "Message",
    "NetworkConfig",
    "RangeSlot",
    "SimNetwork",
    "StepPacket",
    "audit_report",
    "decode_correction",
    "decode_step",
    "encode_correction",
    "encode_step",
    "iter_slots",
    "quantization_step",
    "quantize_correction",
    "quantize_step",
    "ranging_schedule",
]
