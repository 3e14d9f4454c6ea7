from __future__ import annotations

import numpy as np
import pytest

from rave.agents import load_agent_catalog
from rave.bus import BusMessage, EventBus
from rave.clock import SessionClock
from rave.errors import StaleEvent
from rave.events import (
    Agent,
    AgentLifecycleSignal,
    Aoi,
    AoiWindowEvent,
    EpisodeKind,
    Phase,
    Readiness,
    ReadinessEvent,
    SessionControl,
    TimerKind,
)
from rave.manager import DialogueManager, TimerConfig
from rave.plans import PlanLibrary
from rave.scenario import (
    GazeSegment,
    Scenario,
    ThermalSegment,
    TimelineBehavior,
)
from rave.session import run_session
from conftest import cooperative_scenario, quiet_scenario, random_scenario


class RecordingScheduler:
    def __init__(self):
        self.timers = {}
        self.cancelled = []
        self.wakes = []

    def schedule_timer(self, timer):
        self.timers[timer.id] = timer

    def cancel_timer(self, timer_id):
        self.cancelled.append(timer_id)
        self.timers.pop(timer_id, None)

    def schedule_wake(self, t_ms):
        self.wakes.append(t_ms)


@pytest.fixture
def dm_env(policy, catalog):
    clock = SessionClock()
    clock.start(0)
    bus = EventBus(clock)
    scheduler = RecordingScheduler()
    plans = PlanLibrary(load_agent_catalog(), rng=np.random.default_rng(0))
    dm = DialogueManager(bus, policy, catalog, plans, scheduler, TimerConfig())
    commands = bus.subscribe("dm.command.avatar")
    commands_robot = bus.subscribe("dm.command.robot")
    return clock, bus, scheduler, dm, commands, commands_robot


def aoi_event(label, end=500, fixated=False):
    return AoiWindowEvent(end - 500, end, label, fixated, {}, 1.0)


def test_aoi_event_updates_only_gaze_fields(dm_env, catalog):
    clock, bus, scheduler, dm, *_ = dm_env
    bus.publish("perception.aoi", aoi_event(Aoi.AVATAR), "sim.gaze")
    dm.pump()
    assert dm.state.aoi == Aoi.AVATAR
    assert dm.state.readiness == Readiness.NONE
    assert dm.state.last_behavior is None


def test_lifecycle_started_marks_agent_executing(dm_env):
    clock, bus, scheduler, dm, *_ = dm_env
    bus.publish(
        "agent.robot.lifecycle",
        AgentLifecycleSignal(Agent.ROBOT, "Nod", Phase.STARTED, 0, "d9"),
        "executor.robot",
    )
    dm.pump()
    assert dm.state.robot.status == "Executing"
    assert dm.state.robot.behavior == "Nod"


def test_fired_timer_is_removed_from_pending(dm_env):
    clock, bus, scheduler, dm, *_ = dm_env
    dm.start_session(0)
    idle = next(t for t in dm.state.timers.values() if t.timer_kind == TimerKind.IDLE_TIMEOUT)
    clock.advance_to(idle.fire_at)
    bus.publish("dm.timer", idle, "dm")
    dm.pump()
    assert idle.id not in dm.state.timers
    # A plan was active, so the idle timer re-arms under a fresh id.
    assert any(t.timer_kind == TimerKind.IDLE_TIMEOUT for t in dm.state.timers.values())


def test_stale_event_rejected(dm_env):
    clock, bus, scheduler, dm, *_ = dm_env
    clock.advance_to(10000)
    bus.publish("perception.aoi", aoi_event(Aoi.AVATAR, end=10000), "sim.gaze")
    dm.pump()
    stale = BusMessage("perception.aoi", 99, 5000, "sim.gaze", aoi_event(Aoi.ROBOT, end=5000))
    with pytest.raises(StaleEvent):
        dm.process(stale)


def test_parent_toggle_reaches_the_state(dm_env):
    clock, bus, scheduler, dm, *_ = dm_env
    bus.publish("session.control", SessionControl(action="parent", parent_joined=True), "gw")
    dm.pump()
    assert dm.state.parent_joined is True


def test_fresh_session_installs_familiarization_and_dispatches_wakeup(dm_env):
    clock, bus, scheduler, dm, commands, commands_robot = dm_env
    dm.start_session(0)
    assert dm.state.episode == EpisodeKind.FAMILIARIZATION
    first = commands_robot.drain()
    assert [m.payload.behavior for m in first] == ["WakeUp"]
    assert commands.drain() == []  # avatar waits for its turn


def test_sequencing_waits_for_ended(dm_env):
    clock, bus, scheduler, dm, commands, commands_robot = dm_env
    dm.start_session(0)
    commands_robot.drain()
    # Started alone must not advance the plan.
    bus.publish(
        "agent.robot.lifecycle",
        AgentLifecycleSignal(Agent.ROBOT, "WakeUp", Phase.STARTED, 0, "d1"),
        "executor.robot",
    )
    dm.pump()
    assert commands_robot.drain() == []
    clock.advance_to(1500)
    bus.publish(
        "agent.robot.lifecycle",
        AgentLifecycleSignal(Agent.ROBOT, "WakeUp", Phase.ENDED, 1500, "d1"),
        "executor.robot",
    )
    dm.pump()
    nxt = commands_robot.drain()
    assert [m.payload.behavior for m in nxt] == ["Nod"]


# --- integration through the session runner -----------------------------------


def run_mid_rhyme_interrupt(label="Crying", parent=False):
    scenario = Scenario(
        name="mid-rhyme",
        seed=9,
        duration_ms=40000,
        condition="three_way" if parent else "two_way",
        parent_joined_at_ms=14000 if parent else None,
        gaze=(GazeSegment(0, 40000, "Avatar"),),
        thermal=(
            ThermalSegment(0, 2000, 34.0, 34.0),
            ThermalSegment(2000, 32000, 34.0, 34.6),
            ThermalSegment(32000, 40000, 34.6, 34.6),
        ),
        behaviors=(TimelineBehavior(17000, label),),
    )
    return run_session(scenario)


def find_install_after(audit, t, cause=None):
    for entry in audit:
        if entry["cause"] == "install" and entry["t"] >= t:
            if cause is None or entry.get("provenance") == cause:
                return entry
    return None


def test_crying_mid_rhyme_discards_remaining_steps_and_soothes():
    result = run_mid_rhyme_interrupt("Crying")
    behavior_discards = [
        e for e in result.audit if e["cause"] == "behavior" and e["label"] == "Crying"
    ]
    assert behavior_discards and behavior_discards[0]["discarded"] > 0
    t_interrupt = behavior_discards[0]["t"]
    install = find_install_after(result.audit, t_interrupt)
    assert install["episode"] == "Soothing"
    assert install["provenance"] == "distress_avatar"


def test_executing_primitive_completes_before_the_new_plan_starts():
    result = run_mid_rhyme_interrupt("Crying")
    records = result.trace.records
    t_interrupt = next(
        m.timestamp for m in records if m.topic == "perception.behavior"
    )
    # Whatever the avatar was executing at the interrupt must end before
    # its next command dispatch (primitives are atomic).
    avatar_cmds = [m for m in records if m.topic == "dm.command.avatar"
                   and m.payload.action == "execute"]
    avatar_ends = [m for m in records if m.topic == "agent.avatar.lifecycle"
                   and m.payload.phase == Phase.ENDED and m.payload.dispatch_id]
    in_flight_end = next((m for m in avatar_ends if m.timestamp >= t_interrupt), None)
    next_cmd = next((m for m in avatar_cmds if m.timestamp > t_interrupt), None)
    if in_flight_end is not None and next_cmd is not None:
        assert next_cmd.timestamp >= in_flight_end.timestamp


def test_aoi_events_never_discard_plan_steps():
    result = run_session(cooperative_scenario())
    for entry in result.audit:
        if entry.get("discarded", 0) > 0:
            assert entry["cause"] in ("behavior",), entry


def test_gaze_to_parent_mid_rhyme_triggers_attention_recovery():
    result = run_mid_rhyme_interrupt("GazeToParent")
    interrupt = next(e for e in result.audit if e["cause"] == "behavior")
    install = find_install_after(result.audit, interrupt["t"])
    assert install["provenance"] == "social_referencing_gaze_to_parent"
    # The recovery plan opens with the attend-to-me sign.
    cmd = next(
        m for m in result.trace.commands()
        if m.timestamp >= interrupt["t"] and m.payload.agent == Agent.AVATAR
        and m.payload.action == "execute"
    )
    assert cmd.payload.behavior == "LookAtMe"


def test_parent_presence_does_not_change_the_recovery_plan():
    without = run_mid_rhyme_interrupt("GazeToParent", parent=False)
    with_parent = run_mid_rhyme_interrupt("GazeToParent", parent=True)
    strip = lambda result: [
        (m.timestamp, m.topic, m.payload.behavior, m.payload.action)
        for m in result.trace.commands()
    ]
    assert strip(without) == strip(with_parent)


def test_error_recovery_resets_both_agents_and_replans():
    from rave.agents import FaultInjection

    scenario = Scenario(
        name="fault",
        seed=5,
        duration_ms=30000,
        gaze=(GazeSegment(0, 30000, "Robot"),),
        behaviors=(TimelineBehavior(12000, "Attention"),),
        faults=(FaultInjection(Agent.ROBOT, "Nod", occurrence=2, reason="stall"),),
    )
    result = run_session(scenario)
    records = result.trace.records
    error = next(m for m in records if m.topic.startswith("agent.")
                 and m.payload.phase == Phase.ERROR)
    resets = [m for m in records if m.topic.startswith("dm.command.")
              and m.payload.action == "reset" and m.timestamp == error.timestamp]
    assert {m.payload.agent for m in resets} == {Agent.AVATAR, Agent.ROBOT}
    recovery = next(e for e in result.audit
                    if e["cause"].startswith("error:") and e["t"] == error.timestamp)
    assert recovery is not None
    install = find_install_after(result.audit, error.timestamp)
    assert install is not None  # a fresh plan follows recovery


def test_plan_completion_clears_episode_and_timer():
    result = run_session(quiet_scenario(duration_ms=12000))
    completes = [e for e in result.audit if e["cause"] == "complete"]
    assert completes, "familiarization must complete"
    t_done = completes[0]["t"]
    snapshot = next(
        m.payload.state for m in result.trace.records
        if m.topic == "dm.state" and m.timestamp == t_done
        and m.payload.state["episode"] == "Idle"
    )
    assert all(not t["id"].startswith("episode-") for t in snapshot["timers"])


def test_idle_timeout_fires_attention_getting_within_one_step():
    result = run_session(quiet_scenario(duration_ms=20000))
    records = result.trace.records
    install = next(e for e in result.audit
                   if e["cause"] == "install" and e["provenance"] == "idle_timeout")
    assert install["episode"] == "AttentionGetting"
    # The plan lands in the same processing step as an idle-timer firing.
    fires = [m.timestamp for m in records if m.topic == "dm.timer"
             and m.payload.timer_kind == TimerKind.IDLE_TIMEOUT]
    assert install["t"] in fires
    first_cmd = next(m for m in result.trace.commands() if m.timestamp >= install["t"])
    assert first_cmd.timestamp == install["t"]


def test_preemption_exclusivity_and_atomicity_randomized(catalog):
    rng = np.random.default_rng(123)
    for i in range(60):
        scenario = random_scenario(rng, catalog, duration_ms=12000, index=i)
        result = run_session(scenario)
        for entry in result.audit:
            if entry.get("discarded", 0) > 0:
                assert entry["cause"] == "behavior", (scenario.name, entry)
        assert_primitive_atomicity(result.trace.records)


def assert_primitive_atomicity(records):
    """No dm.command for an agent strictly inside another dispatch's
    Started..terminal interval on that agent."""
    started_at: dict[tuple[Agent, str], int] = {}
    intervals: dict[Agent, list[tuple[int, float, str]]] = {
        Agent.AVATAR: [], Agent.ROBOT: []
    }
    commands = []
    for m in records:
        if m.topic.startswith("agent.") and m.payload.dispatch_id:
            key = (m.payload.agent, m.payload.dispatch_id)
            if m.payload.phase == Phase.STARTED:
                started_at[key] = m.timestamp
            else:
                start = started_at.pop(key, m.timestamp)
                intervals[m.payload.agent].append((start, m.timestamp, key[1]))
        elif m.topic.startswith("dm.command.") and m.payload.action == "execute":
            commands.append(m)
    for (agent, did), start in started_at.items():  # unterminated at session end
        intervals[agent].append((start, float("inf"), did))
    for m in commands:
        for start, end, did in intervals[m.payload.agent]:
            if did == m.payload.dispatch_id:
                continue
            assert not (start < m.timestamp < end), (
                f"command {m.payload.behavior} interleaves {did} "
                f"({start}..{end}) on {m.payload.agent} at {m.timestamp}"
            )


def test_rhyme_rotation_advances_round_robin():
    scenario = cooperative_scenario(duration_ms=90000)
    result = run_session(scenario)
    rhymes = [e["rhyme"] for e in result.audit
              if e["cause"] == "install" and e["episode"] == "NurseryRhyme"]
    assert len(rhymes) >= 2
    rotation = [r for r in rhymes if r != "Cat"] or rhymes
    expected_cycle = ["Boat", "Pig", "Fish", "Cat"]
    start = expected_cycle.index(rotation[0])
    for offset, rhyme in enumerate(rotation):
        assert rhyme == expected_cycle[(start + offset) % 4] or rhyme == "Cat"
