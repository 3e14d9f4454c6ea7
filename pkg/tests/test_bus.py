from __future__ import annotations

import threading

import numpy as np
import pytest

from rave.bus import TOPICS, EventBus
from rave.clock import SessionClock
from rave.errors import (
    MalformedPattern,
    SessionNotStarted,
    SubscriptionClosed,
    UnregisteredTopic,
)


def make_bus(started=True):
    clock = SessionClock()
    if started:
        clock.start(0)
    return EventBus(clock), clock


def test_seq_is_a_monotone_counter_per_topic():
    bus, _ = make_bus()
    seqs = [bus.publish("perception.aoi", {"label": "Avatar"}, "gaze") for _ in range(7)]
    assert seqs == [1, 2, 3, 4, 5, 6, 7]
    assert bus.publish("perception.thermal", {}, "thermal") == 1  # independent counter


def test_publish_to_unregistered_topic_is_rejected():
    bus, _ = make_bus()
    with pytest.raises(UnregisteredTopic):
        bus.publish("bogus.topic", {}, "x")


def test_publish_before_session_start_is_rejected():
    bus, _ = make_bus(started=False)
    with pytest.raises(SessionNotStarted):
        bus.publish("perception.aoi", {}, "gaze")


def test_same_topic_delivery_preserves_publish_order():
    bus, _ = make_bus()
    sub = bus.subscribe("perception.aoi")
    bus.publish("perception.aoi", "first", "gaze")
    bus.publish("perception.aoi", "second", "gaze")
    got = [m.payload for m in sub.drain()]
    assert got == ["first", "second"]


def test_prefix_wildcard_matches_all_topics_under_it():
    bus, _ = make_bus()
    sub = bus.subscribe("perception.*")
    bus.publish("perception.aoi", 1, "gaze")
    bus.publish("perception.thermal", 2, "thermal")
    bus.publish("dm.state", 3, "dm")
    assert [m.payload for m in sub.drain()] == [1, 2]


def test_no_retroactive_delivery():
    bus, _ = make_bus()
    bus.publish("dm.state", "early", "dm")
    sub = bus.subscribe("dm.state")
    assert sub.drain() == []


@pytest.mark.parametrize(
    "pattern",
    ["perception.**.*", "perception", "*", "*.aoi", "Perception.*", "perception..aoi"],
)
def test_malformed_patterns_rejected(pattern):
    bus, _ = make_bus()
    with pytest.raises(MalformedPattern):
        bus.subscribe(pattern)


def test_subscribing_to_unknown_exact_topic_is_rejected():
    bus, _ = make_bus()
    with pytest.raises(UnregisteredTopic):
        bus.subscribe("bogus.topic")


def test_drain_empties_and_close_invalidates():
    bus, _ = make_bus()
    sub = bus.subscribe("dm.state")
    for i in range(3):
        bus.publish("dm.state", i, "dm")
    msgs = sub.drain()
    assert [m.seq for m in msgs] == [1, 2, 3]
    assert sub.drain() == []
    sub.close()
    with pytest.raises(SubscriptionClosed):
        sub.drain()


def test_per_topic_seq_strictly_increasing_under_random_publishing():
    bus, _ = make_bus()
    sub = bus.subscribe("perception.*")
    rng = np.random.default_rng(9)
    topics = ["perception.aoi", "perception.thermal", "perception.behavior"]
    for _ in range(500):
        bus.publish(topics[int(rng.integers(3))], None, "src")
    seen: dict[str, int] = {}
    for m in sub.drain():
        assert m.seq > seen.get(m.topic, 0)
        seen[m.topic] = m.seq


def test_no_message_loss_under_concurrent_publishers():
    bus, _ = make_bus()
    sub = bus.subscribe("perception.aoi")
    n_threads, per_thread = 8, 200

    def worker(tid):
        for i in range(per_thread):
            bus.publish("perception.aoi", (tid, i), f"producer-{tid}")

    threads = [threading.Thread(target=worker, args=(t,)) for t in range(n_threads)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    msgs = sub.drain()
    assert len(msgs) == n_threads * per_thread
    assert [m.seq for m in msgs] == sorted(m.seq for m in msgs)
    # per-producer FIFO survives the interleaving
    for tid in range(n_threads):
        own = [m.payload[1] for m in msgs if m.payload[0] == tid]
        assert own == list(range(per_thread))


def test_sources_distinguish_identical_payloads():
    bus, _ = make_bus()
    sub = bus.subscribe("perception.behavior")
    bus.publish("perception.behavior", {"label": "Waving"}, "scripted")
    bus.publish("perception.behavior", {"label": "Waving"}, "operator")
    a, b = sub.drain()
    assert a.payload == b.payload
    assert (a.source, b.source) == ("scripted", "operator")


def test_registry_is_closed_and_complete():
    assert "perception.aoi" in TOPICS
    assert len(TOPICS) == 10
