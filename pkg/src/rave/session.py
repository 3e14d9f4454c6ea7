"""Session runner: drives full sessions and bit-exact replays.

Everything is scheduled on one agenda ordered by (time, topic, insertion);
each popped entry publishes onto the bus, then consumers (executors, then
the dialogue manager) are pumped until quiescent before the next pop. The
same machinery replays a trace by re-feeding its recorded perception,
lifecycle, and session-control records while the dialogue manager and its
timers are regenerated live; the regenerated command stream must equal the
recorded one.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .agents import AgentExecutor, load_agent_catalog
from .behaviors import BehaviorCatalog, load_catalog
from .bus import BusMessage, EventBus
from .clock import SessionClock
from .config import RaveConfig, config_from_dict
from .errors import PolicyIncomplete
from .events import (
    Agent,
    AgentCommand,
    BabyBehaviorEvent,
    SessionControl,
    TimerSignal,
)
from .gaze import classify_window
from .manager import DialogueManager
from .plans import PlanLibrary
from .policy import PolicyTable, check_policy_coverage, load_policy
from .scenario import Scenario, ScriptedBaby
from .thermal import ThermalClassifier
from .trace import SessionTrace, new_trace, read_trace, render_timeline

# Replay re-feeds only the externally produced records; agent lifecycle,
# commands, timers, and state snapshots are regenerated live.
REPLAYED_TOPIC_PREFIXES = ("perception.", "session.control")


class Agenda:
    """Priority queue of future work, ordered by (time, topic, insertion)."""

    def __init__(self):
        self._heap: list[tuple[int, str, int, tuple]] = []
        self._counter = 0
        self._cancelled: set[str] = set()

    def add(self, t_ms: int, topic_key: str, entry: tuple) -> None:
        self._counter += 1
        heapq.heappush(self._heap, (t_ms, topic_key, self._counter, entry))

    def cancel_timer(self, timer_id: str) -> None:
        self._cancelled.add(timer_id)

    def _skip_cancelled(self) -> None:
        while self._heap:
            entry = self._heap[0][3]
            if entry[0] == "timer" and entry[1].id in self._cancelled:
                heapq.heappop(self._heap)
            else:
                return

    def peek_t(self) -> Optional[int]:
        self._skip_cancelled()
        return self._heap[0][0] if self._heap else None

    def pop(self) -> tuple[int, tuple]:
        self._skip_cancelled()
        t, _, _, entry = heapq.heappop(self._heap)
        return t, entry


@dataclass
class SessionResult:
    trace: SessionTrace
    episode_counts: dict[str, int]
    interrupts_handled: int
    audit: list[dict[str, Any]]


@dataclass
class ReplayReport:
    ok: bool
    recorded_commands: int
    regenerated_commands: int
    first_divergence: Optional[int]
    detail: str
    config_matched: bool
    timeline: list[str] = field(default_factory=list)


class _Scheduler:
    """Adapter giving the dialogue manager timers and step-gate wakes."""

    def __init__(self, runner: "SessionRunner"):
        self.runner = runner

    def schedule_timer(self, timer: TimerSignal) -> None:
        self.runner.agenda.add(timer.fire_at, "dm.timer", ("timer", timer))

    def cancel_timer(self, timer_id: str) -> None:
        self.runner.agenda.cancel_timer(timer_id)

    def schedule_wake(self, t_ms: int) -> None:
        self.runner.agenda.add(t_ms, "dm.wake", ("wake",))


class SessionRunner:
    def __init__(
        self,
        config: RaveConfig,
        seed: int,
        duration_ms: int,
        scenario: Optional[Scenario] = None,
        replay_records: Optional[list[BusMessage]] = None,
        policy: Optional[PolicyTable] = None,
        catalog: Optional[BehaviorCatalog] = None,
        realtime: bool = False,
        scenario_name: str = "",
        gateway: Optional[Any] = None,
        faults: Optional[list] = None,
    ):
        self.config = config
        self.seed = seed
        self.duration_ms = duration_ms
        self.scenario = scenario
        self.replay_records = replay_records
        self.realtime = realtime
        self.gateway = gateway

        self.clock = SessionClock(realtime=realtime)
        self.bus = EventBus(self.clock)
        self.agenda = Agenda()
        self.catalog = catalog if catalog is not None else load_catalog()
        self.policy = policy if policy is not None else load_policy()

        coverage = check_policy_coverage(self.policy, self.catalog)
        if not coverage.ok:
            raise PolicyIncomplete(
                f"policy leaves {len(coverage.uncovered)} combinations uncovered, "
                f"e.g. {coverage.uncovered[:3]}"
            )

        self.agent_catalog = load_agent_catalog(
            duration_overrides=config.agents.durations,
            rhyme_padding_ms=config.agents.rhyme_padding_ms,
        )
        plans = PlanLibrary(
            self.agent_catalog,
            rng=np.random.default_rng([seed, 0]),
            robot_gaze_to_avatar=config.agents.robot_gaze_to_avatar,
            avatar_gaze_to_robot=config.agents.avatar_gaze_to_robot,
        )
        self.dm = DialogueManager(
            bus=self.bus,
            policy=self.policy,
            catalog=self.catalog,
            plans=plans,
            scheduler=_Scheduler(self),
            timers=config.timers.params(),
            reorder_tolerance_ms=config.session.reorder_tolerance_ms,
        )

        fault_list = list(faults) if faults is not None else (
            list(scenario.faults) if scenario else []
        )
        self.trace = new_trace(
            scenario_name or (scenario.name if scenario else "replay"),
            seed,
            duration_ms,
            config.to_dict(),
            config.hash(),
            faults=[
                {
                    "agent": f.agent.value,
                    "behavior": f.behavior,
                    "occurrence": f.occurrence,
                    "reason": f.reason,
                    "after_ms": f.after_ms,
                }
                for f in fault_list
            ],
        )
        self.bus.add_tap(self.trace.records.append)

        self.baby: Optional[ScriptedBaby] = None
        self._thermal = ThermalClassifier(config.thermal.params())
        self._geometry = config.aoi.geometry()
        self._fixation = config.aoi.fixation()

        self.executors = {
            agent: AgentExecutor(
                agent, self.bus, self.agent_catalog, self._schedule_lifecycle, faults=fault_list
            )
            for agent in (Agent.AVATAR, Agent.ROBOT)
        }
        if replay_records is None:
            self._setup_scenario()
        else:
            self._setup_replay()

        if gateway is not None:
            gateway.attach(self)

    # --- setup ------------------------------------------------------------

    def _schedule_lifecycle(self, t_ms: int, topic: str, payload: Any, source: str) -> None:
        self.agenda.add(t_ms, topic, ("lifecycle", topic, payload, source))

    def _setup_scenario(self) -> None:
        scenario = self.scenario
        if scenario is None:
            scenario = Scenario(name="empty", seed=self.seed, duration_ms=self.duration_ms)
            self.scenario = scenario
        for b in scenario.behaviors:
            event = self.catalog.validate_event({"t": b.at_ms, "label": b.label})
            self.agenda.add(b.at_ms, "perception.behavior",
                            ("publish", "perception.behavior", event, "sim.baby"))
        if scenario.parent_joined_at_ms is not None:
            self.agenda.add(
                scenario.parent_joined_at_ms,
                "session.control",
                ("publish", "session.control",
                 SessionControl(action="parent", parent_joined=True), "sim.baby"),
            )
        self.baby = ScriptedBaby(
            scenario,
            self._geometry,
            rng_gaze=np.random.default_rng([scenario.seed, 1]),
            rng_thermal=np.random.default_rng([scenario.seed, 2]),
            rng_react=np.random.default_rng([scenario.seed, 3]),
        )
        window_ms = 500
        for end in range(window_ms, self.duration_ms + 1, window_ms):
            self.agenda.add(end, "perception.aoi", ("gaze_window", end))
        hop_ms = int(self.config.thermal.hop_s * 1000)
        for end in range(hop_ms, self.duration_ms + 1, hop_ms):
            self.agenda.add(end, "perception.thermal", ("thermal_hop", end))
        self.bus.add_tap(self._reaction_tap)

    def _setup_replay(self) -> None:
        for m in self.replay_records:
            if m.topic.startswith(REPLAYED_TOPIC_PREFIXES):
                self.agenda.add(m.timestamp, m.topic,
                                ("publish", m.topic, m.payload, m.source))

    def _reaction_tap(self, msg: BusMessage) -> None:
        if not msg.topic.startswith("dm.command.") or self.baby is None:
            return
        cmd: AgentCommand = msg.payload
        if cmd.action != "execute":
            return
        for emission in self.baby.react(cmd.behavior, msg.timestamp):
            label = self.baby.apply_emission(emission)
            if label is not None:
                event = self.catalog.validate_event({"t": emission.due_ms, "label": label})
                self.agenda.add(emission.due_ms, "perception.behavior",
                                ("publish", "perception.behavior", event, "sim.baby"))

    # --- main loop ----------------------------------------------------------

    def run(self) -> SessionResult:
        self.clock.start(0)
        if self.replay_records is None:
            self.bus.publish("session.control", SessionControl(action="start"), "harness")
        self.dm.start_session(0)
        self._pump()
        while True:
            self._poll_injections()
            next_t = self.agenda.peek_t()
            if next_t is None or next_t > self.duration_ms:
                if self._wait_for_operator(next_t):
                    continue
                break
            if self.realtime:
                if not self._advance_realtime(next_t):
                    continue  # an injection landed earlier; re-peek
            else:
                self.clock.advance_to(next_t)
            t, entry = self.agenda.pop()
            self._execute(entry, t)
            self._pump()
        self.clock.advance_to(self.duration_ms)
        if self.replay_records is None:
            self.bus.publish("session.control", SessionControl(action="stop"), "harness")
            self._pump()
        self.trace.sort_records()
        return SessionResult(
            trace=self.trace,
            episode_counts=self._episode_counts(),
            interrupts_handled=self.dm.interrupts_handled,
            audit=self.dm.audit,
        )

    def _execute(self, entry: tuple, t: int) -> None:
        kind = entry[0]
        if kind == "publish":
            _, topic, payload, source = entry
            self.bus.publish(topic, payload, source)
        elif kind == "lifecycle":
            _, topic, payload, source = entry
            self.bus.publish(topic, payload, source)
            agent = Agent.AVATAR if "avatar" in topic else Agent.ROBOT
            executor = self.executors.get(agent)
            if executor is not None:
                executor.on_terminal(payload, t)
        elif kind == "timer":
            self.bus.publish("dm.timer", entry[1], "dm")
        elif kind == "wake":
            self.dm.on_wake()
        elif kind == "gaze_window":
            end = entry[1]
            samples = self.baby.gaze_samples(end - 500, end, self.config.aoi.sample_rate_hz)
            event = classify_window(
                self._geometry, samples, self._fixation, self.config.aoi.min_valid_fraction
            )
            self.bus.publish("perception.aoi", event, "sim.gaze")
        elif kind == "thermal_hop":
            end = entry[1]
            hop_ms = int(self.config.thermal.hop_s * 1000)
            samples = self.baby.thermal_samples(end - hop_ms, end, self.config.thermal.sample_rate_hz)
            self._thermal.push_all(samples)
            for ev in self._thermal.flush(end):
                self.bus.publish("perception.thermal", ev, "sim.thermal")

    def _pump(self) -> None:
        while True:
            progressed = 0
            for executor in self.executors.values():
                progressed += executor.pump()
            progressed += self.dm.pump()
            if progressed == 0:
                return

    # --- realtime / operator ------------------------------------------------

    def _poll_injections(self) -> None:
        if self.gateway is None:
            return
        for inj in self.gateway.drain_injections():
            t = min(max(self.clock.now_ms, self.clock.realtime_now_ms()), self.duration_ms)
            if inj["kind"] == "behavior":
                event = self.catalog.validate_event(
                    {"t": t, "label": inj["label"]}, origin="operator"
                )
                self.agenda.add(t, "perception.behavior",
                                ("publish", "perception.behavior", event, "gateway"))
            elif inj["kind"] == "session":
                control = SessionControl(action="parent", parent_joined=inj["parent_joined"])
                self.agenda.add(t, "session.control",
                                ("publish", "session.control", control, "gateway"))

    def _advance_realtime(self, target_ms: int) -> bool:
        """Advance toward target in short steps, letting injections preempt."""
        while self.clock.now_ms < target_ms:
            step = min(target_ms, self.clock.now_ms + 50)
            self.clock.advance_to(step)
            self._poll_injections()
            next_t = self.agenda.peek_t()
            if next_t is not None and next_t < target_ms:
                return False
        return True

    def _wait_for_operator(self, next_t: Optional[int]) -> bool:
        """In realtime gateway sessions, idle until the duration elapses."""
        if not (self.realtime and self.gateway is not None):
            return False
        if self.clock.now_ms >= self.duration_ms:
            return False
        self.clock.advance_to(min(self.clock.now_ms + 50, self.duration_ms))
        self._poll_injections()
        return True

    def _episode_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for entry in self.dm.audit:
            if entry.get("cause") == "install":
                counts[entry["episode"]] = counts.get(entry["episode"], 0) + 1
        return counts


def run_session(
    scenario: Scenario,
    config: Optional[RaveConfig] = None,
    policy: Optional[PolicyTable] = None,
    realtime: bool = False,
    gateway: Optional[Any] = None,
    seed: Optional[int] = None,
) -> SessionResult:
    """Run one full scripted session and return its trace and summary."""
    config = config if config is not None else RaveConfig()
    scenario.validate()
    runner = SessionRunner(
        config=config,
        seed=seed if seed is not None else scenario.seed,
        duration_ms=scenario.duration_ms,
        scenario=scenario if seed is None else _reseeded(scenario, seed),
        policy=policy,
        realtime=realtime,
        gateway=gateway,
    )
    return runner.run()


def _reseeded(scenario: Scenario, seed: int) -> Scenario:
    from dataclasses import replace

    return replace(scenario, seed=seed)


def replay(
    trace: SessionTrace | Path,
    current_config: Optional[RaveConfig] = None,
    render: bool = False,
) -> ReplayReport:
    """Re-feed a trace through a fresh dialogue manager and compare commands."""
    if not isinstance(trace, SessionTrace):
        trace = read_trace(Path(trace), verify=True)
    header = trace.header
    config = config_from_dict(header["config"])
    config_matched = current_config is None or current_config.hash() == header["config_hash"]

    from .agents import FaultInjection

    faults = [
        FaultInjection(
            agent=Agent(f["agent"]),
            behavior=f["behavior"],
            occurrence=f["occurrence"],
            reason=f["reason"],
            after_ms=f.get("after_ms"),
        )
        for f in header.get("faults", [])
    ]
    runner = SessionRunner(
        config=config,
        seed=header["seed"],
        duration_ms=header["duration_ms"],
        replay_records=trace.records,
        scenario_name=header.get("scenario", "replay"),
        faults=faults,
    )
    result = runner.run()

    recorded = [(m.timestamp, m.topic, m.seq, m.payload) for m in trace.commands()]
    regenerated = [(m.timestamp, m.topic, m.seq, m.payload) for m in result.trace.commands()]
    first_divergence = None
    detail = ""
    for i, (a, b) in enumerate(zip(recorded, regenerated)):
        if a != b:
            first_divergence = i
            detail = f"recorded {a} != regenerated {b}"
            break
    if first_divergence is None and len(recorded) != len(regenerated):
        first_divergence = min(len(recorded), len(regenerated))
        detail = (
            f"command count differs: recorded {len(recorded)}, regenerated {len(regenerated)}"
        )
    return ReplayReport(
        ok=first_divergence is None,
        recorded_commands=len(recorded),
        regenerated_commands=len(regenerated),
        first_divergence=first_divergence,
        detail=detail,
        config_matched=config_matched,
        timeline=render_timeline(trace.records) if render else [],
    )
