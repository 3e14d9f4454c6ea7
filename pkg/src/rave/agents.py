"""Simulated Avatar and Robot executors and their primitive-behavior catalog.

Each executor consumes its own dm.command topic, emits Started at dispatch
and Ended exactly ``duration`` later on the session clock, and never splits
a primitive. Injected faults replace the Ended signal with an Error phase.
Nursery rhymes expose a sign-unit timeline alternating at 1.5 Hz.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

from .bus import EventBus
from .errors import AgentBusy, NotARhyme, UnknownBehavior
from .events import Agent, AgentCommand, AgentLifecycleSignal, Phase

RHYTHM_HZ = 1.5
NUCLEUS_MS = 1000.0 / RHYTHM_HZ  # one sign-unit nucleus

RHYMES = ("Boat", "Pig", "Fish", "Cat")

NEUTRAL_POSE = {Agent.ROBOT: "Sleep", Agent.AVATAR: "GazeForward"}


@dataclass(frozen=True)
class SignUnit:
    gloss: str
    prime: str
    orientation: str
    unit_ms: float = NUCLEUS_MS


@dataclass(frozen=True)
class PrimitiveBehavior:
    agent: Agent
    name: str
    group: str
    duration_ms: int
    sign_units: tuple[SignUnit, ...] = ()


class AgentBehaviorCatalog:
    """Lookup of every dispatchable primitive for both agents."""

    def __init__(self, behaviors: dict[Agent, dict[str, PrimitiveBehavior]]):
        self._behaviors = behaviors

    def get(self, agent: Agent, name: str) -> PrimitiveBehavior:
        try:
            return self._behaviors[agent][name]
        except KeyError:
            raise UnknownBehavior(f"{agent.value} has no behavior {name!r}") from None

    def __contains__(self, key: tuple[Agent, str]) -> bool:
        agent, name = key
        return name in self._behaviors.get(agent, {})

    def names(self, agent: Agent) -> list[str]:
        return list(self._behaviors[agent])

    def duration(self, agent: Agent, name: str) -> int:
        return self.get(agent, name).duration_ms


def load_agent_catalog(
    path: Optional[Path] = None,
    duration_overrides: Optional[dict[str, dict[str, int]]] = None,
    rhyme_padding_ms: float = 0.0,
) -> AgentBehaviorCatalog:
    """Load the behavior data file, applying configured duration overrides."""
    if path is None:
        text = resources.files("rave.data").joinpath("agent_behaviors.json").read_text()
    else:
        text = Path(path).read_text()
    raw = json.loads(text)
    overrides = duration_overrides or {}
    behaviors: dict[Agent, dict[str, PrimitiveBehavior]] = {}
    for agent in Agent:
        table = {}
        agent_overrides = overrides.get(agent.value, {})
        for name, spec in raw[agent.value].items():
            units = tuple(
                SignUnit(g, p, o, NUCLEUS_MS + rhyme_padding_ms)
                for g, p, o in spec.get("sign_units", [])
            )
            duration = agent_overrides.get(name, spec["duration_ms"])
            if duration is None:
                duration = round(len(units) * (NUCLEUS_MS + rhyme_padding_ms))
            if duration <= 0:
                raise UnknownBehavior(f"non-positive duration for {agent.value}.{name}")
            table[name] = PrimitiveBehavior(agent, name, spec["group"], int(duration), units)
        behaviors[agent] = table
    return AgentBehaviorCatalog(behaviors)


def rhyme_timeline(behavior: PrimitiveBehavior) -> list[tuple[str, float, float]]:
    """(gloss, start ms, end ms) nucleus boundaries of a rhyme.

    Successive onsets are exactly one nucleus (plus padding) apart, giving
    zero variation of inter-onset intervals at default padding.
    """
    if not behavior.sign_units:
        raise NotARhyme(f"{behavior.name} carries no sign units")
    timeline = []
    for i, unit in enumerate(behavior.sign_units):
        start = i * unit.unit_ms
        timeline.append((unit.gloss, start, start + NUCLEUS_MS))
    return timeline


@dataclass
class FaultInjection:
    """Replace the Ended signal of one matching dispatch with Error."""

    agent: Agent
    behavior: str
    occurrence: int = 1  # 1-based count of dispatches of this behavior
    reason: str = "injected"
    after_ms: Optional[int] = None  # default: half the behavior duration


class AgentExecutor:
    """One simulated agent; processes its command topic sequentially."""

    def __init__(
        self,
        agent: Agent,
        bus: EventBus,
        catalog: AgentBehaviorCatalog,
        schedule: Callable[[int, str, object, str], None],
        faults: Optional[list[FaultInjection]] = None,
    ):
        self.agent = agent
        self.bus = bus
        self.catalog = catalog
        self._schedule = schedule
        self._faults = [f for f in (faults or []) if f.agent == agent]
        self._seen: dict[str, int] = {}
        self._topic = f"agent.{agent.value.lower()}.lifecycle"
        self._source = f"executor.{agent.value.lower()}"
        self._sub = bus.subscribe(f"dm.command.{agent.value.lower()}")
        self.status = "Idle"  # Idle | Executing | Error
        self.pose = NEUTRAL_POSE[agent]
        self.current: Optional[AgentCommand] = None
        self._pending_terminal: Optional[str] = None  # dispatch_id awaited
        self._deferred_reset = False

    # --- command intake -------------------------------------------------

    def pump(self) -> int:
        """Drain and execute queued commands; returns number processed."""
        msgs = self._sub.drain()
        for msg in msgs:
            cmd: AgentCommand = msg.payload
            if cmd.action == "reset":
                self.reset_to_idle(msg.timestamp)
            else:
                self.execute(cmd, msg.timestamp)
        return len(msgs)

    def execute(self, cmd: AgentCommand, now_ms: int) -> None:
        if self.status == "Executing":
            raise AgentBusy(f"{self.agent.value} is executing {self.current.behavior}")
        behavior = self.catalog.get(self.agent, cmd.behavior)
        self.status = "Executing"
        self.current = cmd
        self._pending_terminal = cmd.dispatch_id
        self._signal(cmd.behavior, Phase.STARTED, now_ms, cmd.dispatch_id)
        fault = self._match_fault(cmd.behavior)
        if fault is not None:
            delay = fault.after_ms if fault.after_ms is not None else behavior.duration_ms // 2
            self._schedule_terminal(now_ms + delay, cmd, Phase.ERROR, fault.reason)
        else:
            self._schedule_terminal(now_ms + behavior.duration_ms, cmd, Phase.ENDED, "")

    def _match_fault(self, behavior: str) -> Optional[FaultInjection]:
        count = self._seen.get(behavior, 0) + 1
        self._seen[behavior] = count
        for f in self._faults:
            if f.behavior == behavior and f.occurrence == count:
                return f
        return None

    def _schedule_terminal(self, at_ms: int, cmd: AgentCommand, phase: Phase, reason: str) -> None:
        signal = AgentLifecycleSignal(
            agent=self.agent,
            behavior=cmd.behavior,
            phase=phase,
            t=at_ms,
            dispatch_id=cmd.dispatch_id,
            reason=reason,
        )
        self._schedule(at_ms, self._topic, signal, self._source)

    def on_terminal(self, signal: AgentLifecycleSignal, now_ms: int) -> None:
        """Bookkeeping when a scheduled terminal signal is published."""
        if signal.dispatch_id != self._pending_terminal:
            return  # stale terminal from a dispatch superseded by reset
        self._pending_terminal = None
        self.current = None
        if signal.phase == Phase.ERROR:
            self.status = "Error"
        else:
            self.status = "Idle"
            self.pose = signal.behavior if signal.behavior in NEUTRAL_POSE.values() else "Active"
        if self._deferred_reset and self.status != "Executing":
            self._deferred_reset = False
            self.reset_to_idle(now_ms)

    # --- reset ----------------------------------------------------------

    def reset_to_idle(self, now_ms: int) -> None:
        """Return to the neutral pose; deferred while healthily executing."""
        if self.status == "Executing":
            self._deferred_reset = True
            return
        self.status = "Idle"
        self.current = None
        self._pending_terminal = None
        self.pose = NEUTRAL_POSE[self.agent]
        # Reset acknowledgement names the neutral pose; not a dispatch.
        self._signal(self.pose, Phase.ENDED, now_ms, None)

    def _signal(self, behavior: str, phase: Phase, t: int, dispatch_id: Optional[str]) -> None:
        self.bus.publish(
            self._topic,
            AgentLifecycleSignal(self.agent, behavior, phase, t, dispatch_id),
            self._source,
        )
