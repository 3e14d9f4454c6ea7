"""In-process publish-subscribe fabric over a closed topic registry.

Per-topic FIFO with strictly increasing seq numbers, atomic publish, and
prefix-wildcard subscriptions. Taps receive every message synchronously at
publish time (trace logger, gateway); subscriptions queue messages for
exactly one consumer each.
"""

from __future__ import annotations

import re
import threading
from collections import deque
from dataclasses import dataclass
from typing import Any, Callable

from .clock import SessionClock
from .errors import (
    MalformedPattern,
    SessionNotStarted,
    SubscriptionClosed,
    UnregisteredTopic,
)

TOPICS = frozenset(
    {
        "perception.aoi",
        "perception.thermal",
        "perception.behavior",
        "agent.avatar.lifecycle",
        "agent.robot.lifecycle",
        "dm.command.avatar",
        "dm.command.robot",
        "dm.state",
        "dm.timer",
        "session.control",
    }
)

_SEGMENT = re.compile(r"^[a-z_]+$")


@dataclass(frozen=True)
class BusMessage:
    topic: str
    seq: int
    timestamp: int
    source: str
    payload: Any


class Subscription:
    """Queued delivery for one consumer; matches an exact topic or prefix."""

    def __init__(self, bus: "EventBus", pattern: str):
        self._bus = bus
        self.pattern = pattern
        self._queue: deque[BusMessage] = deque()
        self.closed = False
        if pattern.endswith(".*"):
            self._prefix = pattern[:-1]  # keep the trailing dot
            self._exact = None
        else:
            self._prefix = None
            self._exact = pattern

    def matches(self, topic: str) -> bool:
        if self._exact is not None:
            return topic == self._exact
        return topic.startswith(self._prefix)

    def drain(self) -> list[BusMessage]:
        return self._bus.drain(self)

    def close(self) -> None:
        self._bus.close(self)


class EventBus:
    """Synchronous in-process bus; publish is atomic under a lock."""

    def __init__(self, clock: SessionClock, topics: frozenset[str] = TOPICS):
        self._clock = clock
        self._topics = topics
        self._seq: dict[str, int] = {t: 0 for t in topics}
        self._last_ts: dict[str, int] = {}
        self._subs: list[Subscription] = []
        self._taps: list[Callable[[BusMessage], None]] = []
        self._lock = threading.Lock()

    def add_tap(self, fn: Callable[[BusMessage], None]) -> None:
        """Register a synchronous observer of every published message."""
        self._taps.append(fn)

    def publish(self, topic: str, payload: Any, source: str) -> int:
        if topic not in self._topics:
            raise UnregisteredTopic(f"topic {topic!r} is not in the registry")
        if not self._clock.started:
            raise SessionNotStarted("publish before session clock start")
        with self._lock:
            timestamp = self._clock.now_ms
            # Clock only moves forward, so per-topic timestamps are
            # non-decreasing by construction; guard against misuse anyway.
            prev = self._last_ts.get(topic)
            if prev is not None and timestamp < prev:
                timestamp = prev
            self._last_ts[topic] = timestamp
            self._seq[topic] += 1
            msg = BusMessage(topic, self._seq[topic], timestamp, source, payload)
            for sub in self._subs:
                if not sub.closed and sub.matches(topic):
                    sub._queue.append(msg)
            for tap in self._taps:
                tap(msg)
        return msg.seq

    def subscribe(self, pattern: str) -> Subscription:
        self._validate_pattern(pattern)
        sub = Subscription(self, pattern)
        with self._lock:
            self._subs.append(sub)
        return sub

    def drain(self, sub: Subscription) -> list[BusMessage]:
        if sub.closed:
            raise SubscriptionClosed(f"subscription {sub.pattern!r} is closed")
        with self._lock:
            out = list(sub._queue)
            sub._queue.clear()
        return out

    def close(self, sub: Subscription) -> None:
        with self._lock:
            sub.closed = True
            if sub in self._subs:
                self._subs.remove(sub)

    def _validate_pattern(self, pattern: str) -> None:
        segments = pattern.split(".")
        if len(segments) < 2:
            raise MalformedPattern(f"pattern {pattern!r} needs at least two segments")
        wildcard = segments[-1] == "*"
        body = segments[:-1] if wildcard else segments
        for seg in body:
            if not _SEGMENT.match(seg):
                raise MalformedPattern(f"bad segment {seg!r} in pattern {pattern!r}")
        if wildcard:
            prefix = ".".join(segments[:-1]) + "."
            if not any(t.startswith(prefix) for t in self._topics):
                raise UnregisteredTopic(f"no registered topic under {pattern!r}")
        elif pattern not in self._topics:
            raise UnregisteredTopic(f"topic {pattern!r} is not in the registry")
