from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, List, Sequence

from coopnav.validation import InvalidInputError, _validate_float_literal


@dataclass(frozen=True)
class RangeSlot:
    t: float
    a: str
    b: str


def iter_slots(agents: Sequence[str], rate_total: float, t_start: float = 0.0) -> Iterator[RangeSlot]:
    """
    Endless round-robin over all agent pairs, one pair per slot at the
    aggregate rate. The first slot falls one period after ``t_start``.
    """
    if len(agents) < 2:
        raise InvalidInputError(f"ranging needs at least 2 agents, got {len(agents)}")
    if len(set(agents)) != len(agents):
        raise InvalidInputError("agent ids must be unique")
    _validate_float_literal("rate_total", rate_total, 0.0, strict=True)
    pairs = list(itertools.combinations(agents, 2))
    for i, (a, b) in enumerate(itertools.cycle(pairs)):
        yield RangeSlot(t=t_start + (i + 1) / rate_total, a=a, b=b)


def ranging_schedule(
    agents: Sequence[str], rate_total: float, t: float, t_start: float = 0.0
) -> List[RangeSlot]:
    """The slots in (t_start, t_start + t]."""
    _validate_float_literal("t", t, 0.0)
    count = math.floor(t * rate_total + 1e-9)
    return list(itertools.islice(iter_slots(agents, rate_total, t_start), count))
