"""
A seeded discrete-event stand-in for the radio links between agents and the
fusion center.

Each agent has an uplink and a downlink. A message is attempted when it is
sent; an attempt during a disconnect waits for the reconnect, a dropped attempt
is retried after ``retry`` seconds. Deliveries on a link never overtake each
other, so a backlog replays in order once the link comes back.
"""

from __future__ import annotations

import heapq
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from coopnav.messaging.audit import CommAudit
from coopnav.validation import (
    InvalidInputError,
    Validated,
    _validate_float_literal,
    _validate_int_literal,
    _validate_probability,
)

logger = logging.getLogger(__name__)

Interval = Tuple[float, float]


class Direction(Enum):
    UP = "up"
    DOWN = "down"


@dataclass(frozen=True)
class NetworkConfig(Validated):
    """
    :param drop_prob: Per-attempt drop probability of every link.
    :param link_drop_prob: Overrides of ``drop_prob`` per agent, both directions.
    :param disconnects: Per agent, the (start, end) intervals without a link.
    :param max_attempts: Give up on a message after this many attempts; never
        when None.
    """

    drop_prob: float = 0.0
    latency: float = 0.05
    jitter: float = 0.0
    retry: float = 0.5
    link_drop_prob: Mapping[str, float] = field(default_factory=dict)
    disconnects: Mapping[str, Sequence[Interval]] = field(default_factory=dict)
    max_attempts: Optional[int] = None
    seed: int = 0

    def validate(self) -> None:
        _validate_probability("drop_prob", self.drop_prob)
        _validate_float_literal("latency", self.latency, 0.0)
        _validate_float_literal("jitter", self.jitter, 0.0)
        _validate_float_literal("retry", self.retry, 0.0, strict=True)
        for agent, p in self.link_drop_prob.items():
            _validate_probability(f"drop_prob of {agent}", p)
        for agent, intervals in self.disconnects.items():
            for start, end in intervals:
                if not (math.isfinite(start) and math.isfinite(end)) or end < start:
                    raise InvalidInputError(
                        f"disconnect of {agent} ({start}, {end}) must be a finite interval"
                    )
        if self.max_attempts is not None:
            _validate_int_literal("max_attempts", self.max_attempts, 1, None)
        _validate_int_literal("seed", self.seed, 0, None)

    def drop_probability(self, agent: str) -> float:
        return float(self.link_drop_prob.get(agent, self.drop_prob))

    def reconnect_time(self, agent: str, t: float) -> Optional[float]:
        """End of the disconnect covering ``t``, if any."""
        for start, end in self.disconnects.get(agent, ()):
            if start <= t < end:
                return float(end)
        return None


@dataclass(frozen=True)
class Message:
    agent: str
    direction: Direction
    kind: str
    seq: int
    payload: bytes
    sent: float


@dataclass(frozen=True)
class Delivery:
    message: Message
    t: float
    attempts: int

    def to_dict(self) -> Dict[str, Union[str, int, float]]:
        return {
            "sent": self.message.sent,
            "delivered": self.t,
            "link": self.message.agent,
            "direction": self.message.direction.value,
            "kind": self.message.kind,
            "seq": self.message.seq,
            "attempts": self.attempts,
            "bytes": len(self.message.payload),
        }


class SimNetwork:
    """
    Single-owner event queue. ``sim_deliver`` schedules a message, ``pop_until``
    hands out the deliveries due by a given time in delivery order.
    """

    def __init__(self, cfg: Optional[NetworkConfig] = None, audit: Optional[CommAudit] = None) -> None:
        self.cfg = cfg or NetworkConfig()
        self.audit = audit
        self.rng = np.random.default_rng(self.cfg.seed)
        self._queue: List[Tuple[float, int, Delivery]] = []
        self._counter = 0
        self._last_delivery: Dict[Tuple[str, Direction], float] = {}
        self.trace: List[Delivery] = []
        self.lost: List[Message] = []

    def sim_deliver(self, message: Message) -> List[Delivery]:
        """
        Schedule ``message``, sent at ``message.sent``.

        :returns: The scheduled delivery, or nothing if the message is lost.
        """
        cfg = self.cfg
        p = cfg.drop_probability(message.agent)
        if self.audit is not None:
            self.audit.record(message.agent, message.direction.value, message.kind, len(message.payload))

        t = message.sent
        attempts = 0
        while True:
            reconnect = cfg.reconnect_time(message.agent, t)
            if reconnect is not None:
                logger.debug(
                    "%s %s %d queued until reconnect at %.3f",
                    message.agent,
                    message.kind,
                    message.seq,
                    reconnect,
                )
                t = reconnect
                continue
            attempts += 1
            if p < 1.0 and self.rng.random() >= p:
                break
            if p >= 1.0 or (cfg.max_attempts is not None and attempts >= cfg.max_attempts):
                logger.info(
                    "%s %s %d lost after %d attempt(s)",
                    message.agent,
                    message.kind,
                    message.seq,
                    attempts,
                )
                self.lost.append(message)
                return []
            t += cfg.retry

        delay = cfg.latency + (cfg.jitter * self.rng.random() if cfg.jitter > 0 else 0.0)
        link = (message.agent, message.direction)
        arrival = max(t + delay, self._last_delivery.get(link, -math.inf))
        self._last_delivery[link] = arrival
        delivery = Delivery(message=message, t=arrival, attempts=attempts)
        heapq.heappush(self._queue, (arrival, self._counter, delivery))
        self._counter += 1
        return [delivery]

    def send(
        self,
        agent: str,
        direction: Direction,
        kind: str,
        seq: int,
        payload: bytes,
        t: float,
    ) -> List[Delivery]:
        return self.sim_deliver(
            Message(agent=agent, direction=direction, kind=kind, seq=seq, payload=payload, sent=t)
        )

    def pop_until(self, t: float) -> List[Delivery]:
        due = []
        while self._queue and self._queue[0][0] <= t:
            _, _, delivery = heapq.heappop(self._queue)
            self.trace.append(delivery)
            due.append(delivery)
        return due

    def next_time(self) -> Optional[float]:
        return self._queue[0][0] if self._queue else None

    def flush(self) -> List[Delivery]:
        return self.pop_until(math.inf)

    @property
    def pending(self) -> int:
        return len(self._queue)

    def trace_lines(self) -> List[str]:
        return [json.dumps(d.to_dict(), sort_keys=True) for d in self.trace]

    def write_trace(self, path: Union[str, Path]) -> None:
        """Delivered messages as JSON lines, in delivery order."""
        lines = self.trace_lines()
        Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))
