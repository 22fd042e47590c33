import itertools
from collections import Counter

import numpy as np
import pytest

from coopnav.messaging.schedule import RangeSlot, iter_slots, ranging_schedule
from coopnav.validation import InvalidInputError


def test_round_robin_over_pairs() -> None:
    slots = list(itertools.islice(iter_slots(["a", "b", "c"], 2.0), 6))
    assert [(s.a, s.b) for s in slots] == [
        ("a", "b"),
        ("a", "c"),
        ("b", "c"),
        ("a", "b"),
        ("a", "c"),
        ("b", "c"),
    ]
    assert [s.t for s in slots] == pytest.approx([0.5, 1.0, 1.5, 2.0, 2.5, 3.0])


def test_schedule_covers_the_window() -> None:
    slots = ranging_schedule(["a0", "a1"], rate_total=1.0, t=10.0, t_start=5.0)
    assert len(slots) == 10
    assert slots[0] == RangeSlot(t=6.0, a="a0", b="a1")
    assert slots[-1].t == pytest.approx(15.0)


def test_aggregate_rate_is_shared_between_pairs() -> None:
    agents = [f"a{i}" for i in range(5)]
    slots = ranging_schedule(agents, rate_total=4.0, t=100.0)
    assert len(slots) == 400
    counts = Counter((s.a, s.b) for s in slots)
    # ten pairs with forty slots each
    assert len(counts) == 10
    assert set(counts.values()) == {40}


def test_empty_window() -> None:
    assert ranging_schedule(["a", "b"], 1.0, t=0.5) == []


@pytest.mark.parametrize(
    "agents, rate, message",
    [
        pytest.param(["a"], 1.0, "ranging needs at least 2 agents, got 1", id="one agent"),
        pytest.param(["a", "a"], 1.0, "agent ids must be unique", id="duplicates"),
        pytest.param(["a", "b"], 0.0, "rate_total '0.0' must be greater than 0.0", id="rate"),
    ],
)
def test_invalid_schedule(agents: list, rate: float, message: str) -> None:
    with pytest.raises(InvalidInputError, match=message):
        next(iter_slots(agents, rate))


def test_three_agents_for_three_seconds() -> None:
    slots = ranging_schedule(["1", "2", "3"], rate_total=1.0, t=3.0)
    assert [(s.a, s.b) for s in slots] == [("1", "2"), ("1", "3"), ("2", "3")]


@pytest.mark.parametrize("n", [2, 4, 7])
def test_every_pair_once_per_round(n: int) -> None:
    agents = [f"a{i}" for i in range(n)]
    pairs = n * (n - 1) // 2
    slots = ranging_schedule(agents, 1.0, t=5.0 * pairs)
    for start in range(0, len(slots) - pairs + 1, 3):
        window = [(s.a, s.b) for s in slots[start : start + pairs]]
        assert len(set(window)) == pairs


def test_random_rosters_share_slots_fairly() -> None:
    rng = np.random.default_rng(5)
    for _ in range(1000):
        n = int(rng.integers(2, 9))
        agents = [f"a{i}" for i in rng.permutation(n)]
        rate = float(rng.uniform(0.1, 10.0))
        slots = ranging_schedule(agents, rate, t=float(rng.uniform(0.0, 60.0)))
        counts = Counter(frozenset((s.a, s.b)) for s in slots)
        pairs = n * (n - 1) // 2
        if len(slots) >= pairs:
            assert len(counts) == pairs
        assert max(counts.values(), default=0) - min(counts.values(), default=0) <= 1
        times = [s.t for s in slots]
        assert times == sorted(times)
        assert all(s.a != s.b for s in slots)
