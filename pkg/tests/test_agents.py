from __future__ import annotations

import numpy as np
import pytest

from rave.agents import (
    NUCLEUS_MS,
    RHYMES,
    AgentExecutor,
    FaultInjection,
    load_agent_catalog,
    rhyme_timeline,
)
from rave.bus import EventBus
from rave.clock import SessionClock
from rave.errors import AgentBusy, NotARhyme, UnknownBehavior
from rave.events import Agent, AgentCommand, Phase


@pytest.fixture
def agent_catalog():
    return load_agent_catalog()


class Harness:
    """Bus + executor + a hand-cranked agenda of scheduled terminals."""

    def __init__(self, agent=Agent.ROBOT, faults=None):
        self.clock = SessionClock()
        self.clock.start(0)
        self.bus = EventBus(self.clock)
        self.scheduled = []
        self.catalog = load_agent_catalog()
        self.executor = AgentExecutor(
            agent, self.bus, self.catalog, self._schedule, faults=faults or []
        )
        self.sub = self.bus.subscribe(f"agent.{agent.value.lower()}.lifecycle")

    def _schedule(self, t, topic, payload, source):
        self.scheduled.append((t, topic, payload, source))

    def fire_next(self):
        self.scheduled.sort(key=lambda e: e[0])
        t, topic, payload, source = self.scheduled.pop(0)
        self.clock.advance_to(t)
        self.bus.publish(topic, payload, source)
        self.executor.on_terminal(payload, t)

    def command(self, behavior, dispatch_id="d1"):
        return AgentCommand(
            agent=self.executor.agent, behavior=behavior, dispatch_id=dispatch_id
        )


def test_duration_contract_started_then_ended(agent_catalog):
    h = Harness()
    h.executor.execute(h.command("Nod"), 1000)
    h.fire_next()
    msgs = h.sub.drain()
    assert [(m.payload.phase, m.payload.t) for m in msgs] == [
        (Phase.STARTED, 1000),
        (Phase.ENDED, 1000 + agent_catalog.duration(Agent.ROBOT, "Nod")),
    ]
    assert h.executor.status == "Idle"


def test_busy_agent_rejects_second_command():
    h = Harness()
    h.executor.execute(h.command("Blink"), 0)
    with pytest.raises(AgentBusy):
        h.executor.execute(h.command("Nod", "d2"), 100)


def test_unknown_behavior_rejected():
    h = Harness()
    with pytest.raises(UnknownBehavior):
        h.executor.execute(h.command("Moonwalk"), 0)
    with pytest.raises(UnknownBehavior):
        h.catalog.get(Agent.ROBOT, "Peekaboo")  # avatar-only behavior


def test_fault_injection_yields_started_then_error():
    h = Harness(agent=Agent.AVATAR, faults=[FaultInjection(Agent.AVATAR, "Peekaboo")])
    h.executor.execute(h.command("Peekaboo"), 0)
    h.fire_next()
    msgs = h.sub.drain()
    assert [m.payload.phase for m in msgs] == [Phase.STARTED, Phase.ERROR]
    assert msgs[1].payload.reason == "injected"
    assert h.executor.status == "Error"


def test_fault_occurrence_counting():
    h = Harness(faults=[FaultInjection(Agent.ROBOT, "Nod", occurrence=2)])
    h.executor.execute(h.command("Nod", "d1"), 0)
    h.fire_next()
    h.executor.execute(h.command("Nod", "d2"), 5000)
    h.fire_next()
    phases = [m.payload.phase for m in h.sub.drain()]
    assert phases == [Phase.STARTED, Phase.ENDED, Phase.STARTED, Phase.ERROR]


# --- reset ------------------------------------------------------------------


def test_reset_after_error_returns_to_sleep_pose():
    h = Harness(faults=[FaultInjection(Agent.ROBOT, "Nod")])
    h.executor.execute(h.command("Nod"), 0)
    h.fire_next()
    h.sub.drain()
    h.executor.reset_to_idle(2000)
    assert h.executor.status == "Idle"
    assert h.executor.pose == "Sleep"
    ack = h.sub.drain()[-1].payload
    assert ack.behavior == "Sleep" and ack.phase == Phase.ENDED
    assert ack.dispatch_id is None


def test_reset_when_idle_is_a_noop_ack():
    h = Harness()
    h.executor.reset_to_idle(0)
    h.executor.reset_to_idle(100)
    acks = h.sub.drain()
    assert len(acks) == 2
    assert all(a.payload.dispatch_id is None for a in acks)
    assert h.executor.status == "Idle"


def test_reset_during_execution_is_deferred_until_ended():
    h = Harness()
    h.executor.execute(h.command("Blink"), 0)
    h.executor.reset_to_idle(100)
    assert h.executor.status == "Executing"  # atomicity preserved
    h.fire_next()
    msgs = h.sub.drain()
    phases = [(m.payload.phase, m.payload.behavior) for m in msgs]
    assert phases[0] == (Phase.STARTED, "Blink")
    assert phases[1] == (Phase.ENDED, "Blink")
    assert phases[2][1] == "Sleep"  # the deferred reset ack, after Ended
    assert h.executor.status == "Idle"


# --- rhyme timelines ------------------------------------------------------------


def test_boat_timeline_units_and_boundaries(agent_catalog):
    boat = agent_catalog.get(Agent.AVATAR, "Boat")
    timeline = rhyme_timeline(boat)
    assert [g for g, _, _ in timeline] == ["BOAT", "BOAT-on-WATER", "WAVE"]
    starts = [s for _, s, _ in timeline]
    assert starts == pytest.approx([0.0, 666.667, 1333.333], abs=0.5)
    assert boat.sign_units[0].prime == "/B/"
    assert boat.sign_units[0].orientation == "palm-in"
    assert boat.sign_units[2].prime == "/5/"


def test_every_rhyme_alternates_at_one_point_five_hz(agent_catalog):
    for rhyme in RHYMES:
        behavior = agent_catalog.get(Agent.AVATAR, rhyme)
        timeline = rhyme_timeline(behavior)
        onsets = [s for _, s, _ in timeline]
        # Intervals compared at nanosecond resolution; the 1.5 Hz nucleus
        # period is not exactly representable in binary floating point.
        iois = np.round(np.diff(onsets), 6)
        assert len(timeline) >= 3
        # Summation oracle: n-1 equal inter-onset gaps of one nucleus each.
        assert onsets[-1] == pytest.approx((len(timeline) - 1) * NUCLEUS_MS, abs=1e-9)
        assert np.all(np.abs(iois - NUCLEUS_MS) <= 0.1 * NUCLEUS_MS)
        assert float(np.std(iois) / np.mean(iois)) == 0.0  # CV exactly zero


def test_rhyme_duration_matches_unit_count(agent_catalog):
    for rhyme, units in (("Boat", 3), ("Pig", 3), ("Fish", 3), ("Cat", 6)):
        behavior = agent_catalog.get(Agent.AVATAR, rhyme)
        assert len(behavior.sign_units) == units
        assert behavior.duration_ms == round(units * NUCLEUS_MS)


def test_non_rhyme_has_no_timeline(agent_catalog):
    with pytest.raises(NotARhyme):
        rhyme_timeline(agent_catalog.get(Agent.ROBOT, "Nod"))


def test_duration_overrides_apply():
    catalog = load_agent_catalog(duration_overrides={"Robot": {"Nod": 555}})
    assert catalog.duration(Agent.ROBOT, "Nod") == 555
    assert catalog.duration(Agent.AVATAR, "Nod") == 800


def test_session_lifecycle_durations_are_exact(agent_catalog):
    # Across a whole session: one Started and one terminal per dispatch,
    # and Ended - Started equals the configured duration exactly (the
    # session clock is virtual, so there is no tolerance).
    from rave.session import run_session
    from conftest import cooperative_scenario

    result = run_session(cooperative_scenario())
    started = {}
    terminals = {}
    for m in result.trace.records:
        if not m.topic.startswith("agent.") or not m.payload.dispatch_id:
            continue
        key = (m.payload.agent, m.payload.dispatch_id)
        if m.payload.phase == Phase.STARTED:
            assert key not in started, "duplicate Started"
            started[key] = m
        else:
            assert key not in terminals, "duplicate terminal"
            terminals[key] = m
    assert started, "session produced no dispatches"
    for key, start in started.items():
        if key not in terminals:
            continue  # in flight at session end
        end = terminals[key]
        if end.payload.phase == Phase.ENDED:
            expected = agent_catalog.duration(start.payload.agent, start.payload.behavior)
            assert end.timestamp - start.timestamp == expected, key


def test_catalog_matches_the_published_inventory(agent_catalog):
    avatar = set(agent_catalog.names(Agent.AVATAR))
    robot = set(agent_catalog.names(Agent.ROBOT))
    assert {"Nod", "GazeForward", "GazeRight", "GazeLeft", "HeadShake",
            "Contemplate", "Think", "Toss"} <= avatar
    assert {"Wave", "Hello", "Peekaboo", "GoAwayComeBack"} <= avatar
    assert {"What", "WhatsWrong", "WhatsThat", "Ready"} <= avatar
    assert {"GoodMorning", "LookAtMe", "Boat", "Pig", "Fish", "Cat"} <= avatar
    assert robot == {"Nod", "Hide", "Unhide", "GazeForward", "GazeRight", "GazeLeft",
                     "Startle", "Blink", "Sleep", "WakeUp"}
