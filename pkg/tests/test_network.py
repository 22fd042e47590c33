import json
from pathlib import Path
from typing import List

import pytest

from coopnav.messaging.audit import CommAudit
from coopnav.messaging.network import Delivery, Direction, NetworkConfig, SimNetwork
from coopnav.validation import InvalidInputError


def send_steps(net: SimNetwork, agent: str, count: int, spacing: float = 0.01) -> List[Delivery]:
    out: List[Delivery] = []
    for k in range(count):
        out += net.send(agent, Direction.UP, "step", k, bytes(23), t=k * spacing)
    return out


def test_lossless_link_adds_the_latency() -> None:
    net = SimNetwork(NetworkConfig(latency=0.05))
    (delivery,) = net.send("a0", Direction.UP, "step", 1, bytes(23), t=2.0)
    assert delivery.t == pytest.approx(2.05)
    assert delivery.attempts == 1
    assert net.pending == 1
    assert net.next_time() == pytest.approx(2.05)
    assert net.pop_until(2.0) == []
    assert net.pop_until(2.05) == [delivery]
    assert net.pending == 0
    assert net.next_time() is None


def test_deliveries_come_out_in_time_order() -> None:
    net = SimNetwork(NetworkConfig(latency=0.1))
    net.send("a0", Direction.UP, "step", 1, b"x", t=1.0)
    net.send("a1", Direction.UP, "step", 1, b"x", t=0.5)
    net.send("a0", Direction.DOWN, "correction", 1, b"x", t=0.7)
    times = [d.t for d in net.flush()]
    assert times == sorted(times)
    assert [d.message.agent for d in net.trace] == ["a1", "a0", "a0"]


def test_disconnect_holds_messages_until_reconnect() -> None:
    net = SimNetwork(NetworkConfig(latency=0.05, disconnects={"a0": [(1.0, 3.0)]}))
    (held,) = net.send("a0", Direction.UP, "step", 1, bytes(23), t=1.5)
    (other,) = net.send("a1", Direction.UP, "step", 1, bytes(23), t=1.5)
    assert held.t == pytest.approx(3.05)
    assert held.attempts == 1
    assert other.t == pytest.approx(1.55)


def test_backlog_replays_in_order() -> None:
    net = SimNetwork(NetworkConfig(latency=0.05, jitter=1.0, disconnects={"a0": [(0.0, 2.0)]}))
    send_steps(net, "a0", 40, spacing=0.1)
    delivered = net.flush()
    assert [d.message.seq for d in delivered] == list(range(40))
    assert all(d.t >= 2.05 for d in delivered)


def test_jitter_never_reorders_a_link() -> None:
    net = SimNetwork(NetworkConfig(latency=0.05, jitter=0.5, seed=3))
    send_steps(net, "a0", 50)
    seqs = [d.message.seq for d in net.flush()]
    assert seqs == list(range(50))


def test_dropped_attempts_are_retried() -> None:
    net = SimNetwork(NetworkConfig(drop_prob=0.5, latency=0.05, retry=0.5, seed=1))
    deliveries = [
        net.send("a0", Direction.UP, "step", k, bytes(23), t=10.0 * k)[0] for k in range(100)
    ]
    assert max(d.attempts for d in deliveries) > 1
    for d in deliveries:
        assert d.t == pytest.approx(d.message.sent + 0.05 + 0.5 * (d.attempts - 1))
    assert not net.lost


def test_attempt_limit_loses_messages() -> None:
    net = SimNetwork(NetworkConfig(drop_prob=0.5, max_attempts=1, seed=2))
    delivered = send_steps(net, "a0", 200)
    assert len(delivered) + len(net.lost) == 200
    assert 50 < len(net.lost) < 150


def test_dead_link_loses_everything_but_is_still_charged() -> None:
    audit = CommAudit()
    net = SimNetwork(NetworkConfig(link_drop_prob={"a1": 1.0}), audit=audit)
    assert send_steps(net, "a1", 5) == []
    assert len(send_steps(net, "a0", 5)) == 5
    assert len(net.lost) == 5
    assert audit.decentralized_bytes == 10 * 23
    assert audit.steps == 10


def test_same_seed_same_trace() -> None:
    def trace(seed: int) -> List[str]:
        net = SimNetwork(NetworkConfig(drop_prob=0.3, jitter=0.2, seed=seed))
        send_steps(net, "a0", 30)
        send_steps(net, "a1", 30)
        net.flush()
        return net.trace_lines()

    assert trace(4) == trace(4)
    assert trace(4) != trace(5)


def test_trace_file(tmp_path: Path) -> None:
    net = SimNetwork()
    net.send("a0", Direction.DOWN, "correction", 3, bytes(11), t=1.0)
    net.flush()
    path = tmp_path / "trace.jsonl"
    net.write_trace(path)
    (line,) = path.read_text().splitlines()
    assert json.loads(line) == {
        "sent": 1.0,
        "delivered": pytest.approx(1.05),
        "link": "a0",
        "direction": "down",
        "kind": "correction",
        "seq": 3,
        "attempts": 1,
        "bytes": 11,
    }


def test_empty_trace_file(tmp_path: Path) -> None:
    path = tmp_path / "trace.jsonl"
    SimNetwork().write_trace(path)
    assert path.read_text() == ""


@pytest.mark.parametrize(
    "kwargs, message",
    [
        pytest.param({"drop_prob": 1.5}, "drop_prob '1.5' is capped at 1.0", id="drop"),
        pytest.param({"latency": -0.1}, "latency '-0.1' must be at least 0.0", id="latency"),
        pytest.param({"retry": 0.0}, "retry '0.0' must be greater than 0.0", id="retry"),
        pytest.param(
            {"link_drop_prob": {"a0": -1.0}},
            "drop_prob of a0 '-1.0' must be at least 0.0",
            id="link",
        ),
        pytest.param(
            {"disconnects": {"a0": [(2.0, 1.0)]}},
            r"disconnect of a0 \(2.0, 1.0\) must be a finite interval",
            id="disconnect",
        ),
        pytest.param({"max_attempts": 0}, "max_attempts '0' must be at least 1", id="attempts"),
    ],
)
def test_invalid_network_config(kwargs: dict, message: str) -> None:
    with pytest.raises(InvalidInputError, match=message):
        NetworkConfig(**kwargs)
