"""Information-state dialogue manager.

Consumes one merged, timestamp-ordered event stream from the bus, keeps
the fused information state, selects plans through the rule policy, and
dispatches plan steps one uninterruptible primitive per agent at a time.

Plan steps are only ever discarded in direct response to a baby-behavior
event (the single interrupting signal), an agent error, or a stuck-episode
timeout; perception and timing events otherwise only update state. When no
plan is active the manager re-evaluates the policy on fresh perceptual
evidence, at plan completion, and when the idle timer fires.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional, Protocol

from .behaviors import BehaviorCatalog
from .bus import BusMessage, EventBus
from .errors import StaleEvent
from .events import (
    Agent,
    AgentCommand,
    AgentLifecycleSignal,
    Aoi,
    AoiWindowEvent,
    BabyBehaviorEvent,
    EpisodeKind,
    Phase,
    Readiness,
    ReadinessEvent,
    SessionControl,
    StateSnapshot,
    TimerKind,
    TimerSignal,
)
from .plans import AFTER_PREVIOUS, ActionPlan, PlanLibrary
from .policy import GuardInput, PolicyTable

RHYME_ROTATION = ("Boat", "Pig", "Fish", "Cat")


class Scheduler(Protocol):
    """Runner-provided scheduling surface for timers and step-gate wakes."""

    def schedule_timer(self, timer: TimerSignal) -> None: ...

    def cancel_timer(self, timer_id: str) -> None: ...

    def schedule_wake(self, t_ms: int) -> None: ...


@dataclass(frozen=True)
class TimerConfig:
    idle_timeout_ms: int = 8000
    episode_timeout_ms: int = 30000
    behavior_watchdog_ms: int = 15000


@dataclass
class AgentView:
    """The manager's belief about one agent, from lifecycle signals."""

    status: str = "Idle"  # Idle | Executing | Error
    behavior: str = ""
    dispatch_id: str = ""
    started_at: int = 0

    def snapshot(self) -> dict[str, Any]:
        return {"status": self.status, "behavior": self.behavior,
                "started_at": self.started_at}


@dataclass
class PlanExecution:
    plan: ActionPlan
    installed_at: int
    next_index: int = 0
    dispatch_ids: list[Optional[str]] = field(default_factory=list)
    terminal: list[bool] = field(default_factory=list)

    def __post_init__(self):
        n = len(self.plan.steps)
        self.dispatch_ids = [None] * n
        self.terminal = [False] * n

    @property
    def all_dispatched(self) -> bool:
        return self.next_index >= len(self.plan.steps)

    @property
    def complete(self) -> bool:
        return self.all_dispatched and all(self.terminal)

    def pending_steps(self) -> int:
        return len(self.plan.steps) - self.next_index


@dataclass
class InformationState:
    clock: int = 0
    aoi: Aoi = Aoi.OUTSIDE
    fixated: bool = False
    readiness: Readiness = Readiness.NONE
    last_behavior: Optional[BabyBehaviorEvent] = None
    behavior_pending: bool = False
    avatar: AgentView = field(default_factory=AgentView)
    robot: AgentView = field(default_factory=AgentView)
    active_plan: Optional[PlanExecution] = None
    episode: EpisodeKind = EpisodeKind.IDLE
    episode_rhyme: str = ""
    parent_joined: bool = False
    timers: dict[str, TimerSignal] = field(default_factory=dict)
    rhyme_rotation: int = 0

    def agent(self, agent: Agent) -> AgentView:
        return self.avatar if agent == Agent.AVATAR else self.robot

    def snapshot(self) -> dict[str, Any]:
        plan = None
        if self.active_plan is not None:
            pe = self.active_plan
            plan = {
                "id": pe.plan.id,
                "provenance": pe.plan.provenance,
                "episode": pe.plan.episode.value,
                "rhyme": pe.plan.rhyme,
                "cursor": pe.next_index,
                "steps": [
                    {"agent": s.agent.value, "behavior": s.behavior, "target": s.target}
                    for s in pe.plan.steps
                ],
                "terminal": list(pe.terminal),
            }
        last = None
        if self.last_behavior is not None:
            b = self.last_behavior
            last = {"t": b.t, "label": b.label, "category": b.category, "origin": b.origin}
        return {
            "clock": self.clock,
            "aoi": self.aoi.value,
            "fixated": self.fixated,
            "readiness": self.readiness.value,
            "rhyme_unit": None,
            "last_behavior": last,
            "behavior_pending": self.behavior_pending,
            "avatar": self.avatar.snapshot(),
            "robot": self.robot.snapshot(),
            "active_plan": plan,
            "episode": self.episode.value,
            "episode_rhyme": self.episode_rhyme,
            "parent_joined": self.parent_joined,
            "timers": [
                {"id": t.id, "kind": t.timer_kind.value, "fire_at": t.fire_at}
                for t in sorted(self.timers.values(), key=lambda t: (t.fire_at, t.id))
            ],
            "rhyme_rotation": self.rhyme_rotation,
        }


class DialogueManager:
    """Single logical consumer of the merged perception/agent/timer stream."""

    SOURCE = "dm"

    def __init__(
        self,
        bus: EventBus,
        policy: PolicyTable,
        catalog: BehaviorCatalog,
        plans: PlanLibrary,
        scheduler: Scheduler,
        timers: TimerConfig = TimerConfig(),
        reorder_tolerance_ms: int = 250,
    ):
        self.bus = bus
        self.policy = policy
        self.catalog = catalog
        self.plans = plans
        self.scheduler = scheduler
        self.timer_config = timers
        self.reorder_tolerance_ms = reorder_tolerance_ms
        self.state = InformationState()
        self.audit: list[dict[str, Any]] = []
        self.interrupts_handled = 0
        self._dispatch_counter = 0
        self._timer_counter = 0
        self._subs = [
            bus.subscribe("perception.*"),
            bus.subscribe("agent.avatar.lifecycle"),
            bus.subscribe("agent.robot.lifecycle"),
            bus.subscribe("dm.timer"),
            bus.subscribe("session.control"),
        ]

    # --- event intake -----------------------------------------------------

    def start_session(self, t0_ms: int = 0) -> None:
        """Install the familiarization plan; both agents start neutral."""
        self.state.clock = t0_ms
        plan = self.plans.familiarization_plan()
        self._install(plan)
        self._step_executor()
        self._publish_snapshot()

    def pump(self) -> int:
        """Drain all subscriptions and process messages in stream order."""
        msgs: list[BusMessage] = []
        for sub in self._subs:
            msgs.extend(sub.drain())
        msgs.sort(key=lambda m: (m.timestamp, m.topic, m.seq))
        for msg in msgs:
            self.process(msg)
        return len(msgs)

    def process(self, msg: BusMessage) -> None:
        if msg.timestamp < self.state.clock - self.reorder_tolerance_ms:
            raise StaleEvent(
                f"event at {msg.timestamp} is older than clock {self.state.clock} "
                f"minus tolerance {self.reorder_tolerance_ms}"
            )
        self.state.clock = max(self.state.clock, msg.timestamp)
        payload = msg.payload
        if isinstance(payload, AoiWindowEvent):
            self._on_aoi(payload)
        elif isinstance(payload, ReadinessEvent):
            self._on_readiness(payload)
        elif isinstance(payload, BabyBehaviorEvent):
            self._on_behavior(payload)
        elif isinstance(payload, AgentLifecycleSignal):
            self._on_lifecycle(payload)
        elif isinstance(payload, TimerSignal):
            self._on_timer(payload)
        elif isinstance(payload, SessionControl):
            self._on_session_control(payload)
        self._step_executor()
        self._publish_snapshot()

    def on_wake(self) -> None:
        """Step-gate wake from the scheduler: a plan offset came due."""
        dispatched = self._step_executor()
        if dispatched:
            self._publish_snapshot()

    # --- per-event-type updates --------------------------------------------

    def _on_aoi(self, ev: AoiWindowEvent) -> None:
        self.state.aoi = ev.label
        self.state.fixated = ev.fixated
        if ev.label in (Aoi.AVATAR, Aoi.ROBOT):
            self._reset_idle_timer()
        if self.state.active_plan is None:
            self._select_and_install("perception")

    def _on_readiness(self, ev: ReadinessEvent) -> None:
        self.state.readiness = ev.state
        if self.state.active_plan is None:
            self._select_and_install("perception")

    def _on_behavior(self, ev: BabyBehaviorEvent) -> None:
        """The one interrupting signal: discard remaining steps, re-plan."""
        self.state.last_behavior = ev
        self.state.behavior_pending = True
        if self.catalog.policy_class(ev.label) == "Engaged":
            self._reset_idle_timer()
        discarded = 0
        if self.state.active_plan is not None:
            discarded = self.state.active_plan.pending_steps()
            self._drop_plan()
        self.interrupts_handled += 1
        self.audit.append(
            {"t": self.state.clock, "cause": "behavior", "label": ev.label, "discarded": discarded}
        )
        self._select_and_install("behavior")

    def _on_lifecycle(self, ev: AgentLifecycleSignal) -> None:
        view = self.state.agent(ev.agent)
        if ev.phase == Phase.STARTED:
            view.status = "Executing"
            view.behavior = ev.behavior
            view.dispatch_id = ev.dispatch_id or ""
            view.started_at = ev.t
            return
        if ev.phase == Phase.ENDED:
            view.status = "Idle"
            view.behavior = ""
            view.dispatch_id = ""
            if ev.dispatch_id:
                self._cancel_timer(f"watchdog-{ev.dispatch_id}")
                self._mark_terminal(ev.dispatch_id)
            return
        # Error: recover both agents to idle and re-plan.
        view.status = "Error"
        view.behavior = ""
        view.dispatch_id = ""
        if ev.dispatch_id:
            self._cancel_timer(f"watchdog-{ev.dispatch_id}")
        self._recover_from_error(f"error:{ev.agent.value}:{ev.behavior}")

    def _on_timer(self, ev: TimerSignal) -> None:
        self.state.timers.pop(ev.id, None)
        if ev.timer_kind == TimerKind.IDLE_TIMEOUT:
            if self.state.active_plan is not None:
                self._reset_idle_timer()
            else:
                self.audit.append({"t": self.state.clock, "cause": "idle_timeout"})
                self._install(self.plans.attention_getting_plan(provenance="idle_timeout"))
        elif ev.timer_kind == TimerKind.EPISODE_TIMEOUT:
            if self.state.active_plan is not None and ev.id == self._episode_timer_id():
                self._recover_from_error("episode_timeout")
        elif ev.timer_kind == TimerKind.BEHAVIOR_WATCHDOG:
            dispatch_id = ev.id.removeprefix("watchdog-")
            if self._dispatch_outstanding(dispatch_id):
                self._recover_from_error("behavior_watchdog")

    def _on_session_control(self, ev: SessionControl) -> None:
        if ev.action == "parent" and ev.parent_joined is not None:
            self.state.parent_joined = ev.parent_joined

    # --- plan selection -----------------------------------------------------

    def guard_input(self) -> GuardInput:
        behavior = self.state.last_behavior if self.state.behavior_pending else None
        return GuardInput(
            aoi=self.state.aoi,
            readiness=self.state.readiness,
            behavior_label=behavior.label if behavior else None,
            behavior_class=self.catalog.policy_class(behavior.label) if behavior else None,
            episode=self.state.episode,
            fixated=self.state.fixated,
        )

    def select_plan(self) -> tuple[Optional[ActionPlan], str]:
        """First matching rule, instantiated; (None, rule_id) for wait rules."""
        rule = self.policy.first_match(self.guard_input())
        self.state.behavior_pending = False
        if rule.plan == "wait":
            return None, rule.id
        rhyme = ""
        if rule.plan in ("nursery_rhyme", "attention_then_rhyme"):
            rhyme = self._next_rhyme()
        return self.plans.build(rule.plan, provenance=rule.id, rhyme=rhyme), rule.id

    def _next_rhyme(self) -> str:
        # A sustained parasympathetic response earns the longest rhyme.
        if self.state.readiness == Readiness.VERY_POSITIVE:
            return "Cat"
        rhyme = RHYME_ROTATION[self.state.rhyme_rotation % len(RHYME_ROTATION)]
        self.state.rhyme_rotation += 1
        return rhyme

    def _select_and_install(self, cause: str) -> None:
        plan, rule_id = self.select_plan()
        if plan is None:
            self.state.episode = EpisodeKind.IDLE
            self.state.episode_rhyme = ""
            return
        self.audit.append(
            {"t": self.state.clock, "cause": f"select:{cause}", "rule": rule_id, "plan": plan.id}
        )
        self._install(plan)

    def _install(self, plan: ActionPlan) -> None:
        self.state.active_plan = PlanExecution(plan, installed_at=self.state.clock)
        self.state.episode = plan.episode
        self.state.episode_rhyme = plan.rhyme
        self.audit.append(
            {
                "t": self.state.clock,
                "cause": "install",
                "plan": plan.id,
                "episode": plan.episode.value,
                "provenance": plan.provenance,
                "rhyme": plan.rhyme,
            }
        )
        self._schedule_timer(self._episode_timer_id(), TimerKind.EPISODE_TIMEOUT,
                             self.state.clock + self.timer_config.episode_timeout_ms)
        self._reset_idle_timer()
        for step in plan.steps:
            if step.offset_ms != AFTER_PREVIOUS:
                self.scheduler.schedule_wake(self.state.clock + step.offset_ms)

    def _drop_plan(self) -> None:
        if self.state.active_plan is not None:
            self._cancel_timer(self._episode_timer_id())
        self.state.active_plan = None

    def _recover_from_error(self, cause: str) -> None:
        discarded = 0
        if self.state.active_plan is not None:
            discarded = self.state.active_plan.pending_steps()
            self._drop_plan()
        self.audit.append({"t": self.state.clock, "cause": cause, "discarded": discarded})
        for agent in (Agent.AVATAR, Agent.ROBOT):
            self.bus.publish(
                f"dm.command.{agent.value.lower()}",
                AgentCommand(agent=agent, behavior="ResetToIdle", action="reset"),
                self.SOURCE,
            )
        self._select_and_install("recovery")

    # --- execution ----------------------------------------------------------

    def _step_executor(self) -> int:
        """Dispatch every step whose gates are open, in plan order."""
        dispatched = 0
        while True:
            pe = self.state.active_plan
            if pe is None:
                return dispatched
            while not pe.all_dispatched:
                i = pe.next_index
                step = pe.plan.steps[i]
                view = self.state.agent(step.agent)
                if view.status != "Idle":
                    break
                if step.offset_ms == AFTER_PREVIOUS:
                    if i > 0 and not pe.terminal[i - 1]:
                        break
                elif self.state.clock < pe.installed_at + step.offset_ms:
                    break
                self._dispatch(pe, i)
                dispatched += 1
            if pe.complete:
                # Completion may install a successor plan; give it a chance
                # to dispatch within this same processing step.
                self._on_plan_complete()
                continue
            return dispatched

    def _dispatch(self, pe: PlanExecution, index: int) -> None:
        step = pe.plan.steps[index]
        self._dispatch_counter += 1
        dispatch_id = f"d{self._dispatch_counter}"
        pe.dispatch_ids[index] = dispatch_id
        pe.next_index = index + 1
        view = self.state.agent(step.agent)
        view.status = "Executing"
        view.behavior = step.behavior
        view.dispatch_id = dispatch_id
        view.started_at = self.state.clock
        self._schedule_timer(
            f"watchdog-{dispatch_id}",
            TimerKind.BEHAVIOR_WATCHDOG,
            self.state.clock + self.timer_config.behavior_watchdog_ms,
        )
        self.bus.publish(
            f"dm.command.{step.agent.value.lower()}",
            AgentCommand(
                agent=step.agent,
                behavior=step.behavior,
                action="execute",
                target=step.target,
                dispatch_id=dispatch_id,
                plan_id=pe.plan.id,
                step=index,
            ),
            self.SOURCE,
        )

    def _mark_terminal(self, dispatch_id: str) -> None:
        pe = self.state.active_plan
        if pe is None:
            return
        for i, did in enumerate(pe.dispatch_ids):
            if did == dispatch_id:
                pe.terminal[i] = True
                break

    def _dispatch_outstanding(self, dispatch_id: str) -> bool:
        for view in (self.state.avatar, self.state.robot):
            if view.dispatch_id == dispatch_id:
                return True
        return False

    def _on_plan_complete(self) -> None:
        pe = self.state.active_plan
        self.audit.append({"t": self.state.clock, "cause": "complete", "plan": pe.plan.id})
        self._drop_plan()
        self.state.episode = EpisodeKind.IDLE
        self.state.episode_rhyme = ""
        self._reset_idle_timer()
        self._select_and_install("completion")

    # --- timers ---------------------------------------------------------------

    def _episode_timer_id(self) -> str:
        pe = self.state.active_plan
        return f"episode-{pe.plan.id}" if pe else "episode-none"

    def _reset_idle_timer(self) -> None:
        for timer_id in [t for t in self.state.timers if t.startswith("idle-")]:
            self._cancel_timer(timer_id)
        self._timer_counter += 1
        self._schedule_timer(
            f"idle-{self._timer_counter}",
            TimerKind.IDLE_TIMEOUT,
            self.state.clock + self.timer_config.idle_timeout_ms,
        )

    def _schedule_timer(self, timer_id: str, kind: TimerKind, fire_at: int) -> None:
        timer = TimerSignal(id=timer_id, fire_at=fire_at, timer_kind=kind)
        self.state.timers[timer_id] = timer
        self.scheduler.schedule_timer(timer)

    def _cancel_timer(self, timer_id: str) -> None:
        if self.state.timers.pop(timer_id, None) is not None:
            self.scheduler.cancel_timer(timer_id)

    # --- outputs ---------------------------------------------------------------

    def _publish_snapshot(self) -> None:
        snapshot = self.state.snapshot()
        snapshot["rhyme_unit"] = self._current_rhyme_unit()
        self.bus.publish("dm.state", StateSnapshot(state=snapshot), self.SOURCE)

    def _current_rhyme_unit(self) -> Optional[dict[str, Any]]:
        """Sign-unit progress while the avatar is mid-rhyme, for observers."""
        view = self.state.avatar
        if view.status != "Executing" or not view.behavior:
            return None
        behavior = self.plans.catalog.get(Agent.AVATAR, view.behavior) \
            if (Agent.AVATAR, view.behavior) in self.plans.catalog else None
        if behavior is None or not behavior.sign_units:
            return None
        elapsed = self.state.clock - view.started_at
        index = min(len(behavior.sign_units) - 1,
                    max(0, int(elapsed // behavior.sign_units[0].unit_ms)))
        unit = behavior.sign_units[index]
        return {"rhyme": view.behavior, "index": index,
                "total": len(behavior.sign_units), "gloss": unit.gloss,
                "prime": unit.prime}
