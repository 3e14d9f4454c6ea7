"""Event payload types carried on the bus, and their wire serialization.

Every payload is a frozen dataclass with a ``kind`` tag; ``payload_to_dict``
and ``payload_from_dict`` round-trip them through plain JSON-compatible
dicts for trace files and gateway frames.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Any, Optional


class Aoi(str, Enum):
    ROBOT = "Robot"
    AVATAR = "Avatar"
    IN_BETWEEN = "InBetween"
    OUTSIDE = "Outside"


class Readiness(str, Enum):
    VERY_NEGATIVE = "VeryNegative"
    NEGATIVE = "Negative"
    POSITIVE = "Positive"
    VERY_POSITIVE = "VeryPositive"
    NONE = "None"


class Agent(str, Enum):
    AVATAR = "Avatar"
    ROBOT = "Robot"


class Phase(str, Enum):
    STARTED = "Started"
    ENDED = "Ended"
    ERROR = "Error"


class TimerKind(str, Enum):
    IDLE_TIMEOUT = "IdleTimeout"
    EPISODE_TIMEOUT = "EpisodeTimeout"
    BEHAVIOR_WATCHDOG = "BehaviorWatchdog"


class EpisodeKind(str, Enum):
    FAMILIARIZATION = "Familiarization"
    NURSERY_RHYME = "NurseryRhyme"
    SOOTHING = "Soothing"
    ATTENTION_GETTING = "AttentionGetting"
    IDLE = "Idle"


@dataclass(frozen=True)
class GazeSample:
    """One 120 Hz gaze point in normalized [0,1]^2 scene coordinates."""

    t: float
    x: float
    y: float
    valid: bool = True


@dataclass(frozen=True)
class ThermalSample:
    """One 50 Hz nose-tip temperature reading, degrees Celsius."""

    t: float
    temp: float
    valid: bool = True


@dataclass(frozen=True)
class AoiWindowEvent:
    """Half-second majority-vote AOI classification."""

    kind = "aoi_window"
    window_start: int
    window_end: int
    label: Aoi
    fixated: bool
    counts: dict[str, int]
    valid_fraction: float


@dataclass(frozen=True)
class ReadinessEvent:
    """Five-valued engagement classification from the thermal channel."""

    kind = "readiness"
    window_end: int
    state: Readiness
    slope: float
    valid_fraction: float


@dataclass(frozen=True)
class BabyBehaviorEvent:
    """A baby behavior, from a scripted model or the live observer."""

    kind = "baby_behavior"
    t: int
    label: str
    category: str
    origin: str = "scripted"  # scripted | operator


@dataclass(frozen=True)
class AgentLifecycleSignal:
    """Started/Ended/Error feedback from an agent executor.

    ``dispatch_id`` ties the signal to one dm.command dispatch; reset
    acknowledgements carry dispatch_id None and are not dispatches.
    """

    kind = "lifecycle"
    agent: Agent
    behavior: str
    phase: Phase
    t: int
    dispatch_id: Optional[str] = None
    reason: str = ""


@dataclass(frozen=True)
class TimerSignal:
    kind = "timer"
    id: str
    fire_at: int
    timer_kind: TimerKind


@dataclass(frozen=True)
class SessionControl:
    """Session start/stop and parent-joined toggles."""

    kind = "session_control"
    action: str  # start | stop | parent
    parent_joined: Optional[bool] = None


@dataclass(frozen=True)
class AgentCommand:
    """dm.command payload instructing one agent executor."""

    kind = "command"
    agent: Agent
    behavior: str
    action: str = "execute"  # execute | reset
    target: str = ""
    dispatch_id: str = ""
    plan_id: str = ""
    step: int = -1


@dataclass(frozen=True)
class StateSnapshot:
    """Full information-state snapshot published on dm.state."""

    kind = "state_snapshot"
    state: dict[str, Any] = field(default_factory=dict)


_PAYLOAD_TYPES = {
    cls.kind: cls
    for cls in (
        AoiWindowEvent,
        ReadinessEvent,
        BabyBehaviorEvent,
        AgentLifecycleSignal,
        TimerSignal,
        SessionControl,
        AgentCommand,
        StateSnapshot,
    )
}

_ENUM_FIELDS_BY_CLASS: dict[type, dict[str, type]] = {
    AoiWindowEvent: {"label": Aoi},
    ReadinessEvent: {"state": Readiness},
    AgentLifecycleSignal: {"agent": Agent, "phase": Phase},
    TimerSignal: {"timer_kind": TimerKind},
    AgentCommand: {"agent": Agent},
}


def payload_to_dict(payload: Any) -> dict[str, Any]:
    out: dict[str, Any] = {"kind": payload.kind}
    for f in fields(payload):
        value = getattr(payload, f.name)
        if isinstance(value, Enum):
            value = value.value
        out[f.name] = value
    return out


def payload_from_dict(data: dict[str, Any]) -> Any:
    data = dict(data)
    kind = data.pop("kind")
    cls = _PAYLOAD_TYPES[kind]
    enum_fields = _ENUM_FIELDS_BY_CLASS.get(cls, {})
    kwargs = {}
    for f in fields(cls):
        if f.name not in data:
            continue
        value = data[f.name]
        enum_cls = enum_fields.get(f.name)
        if enum_cls is not None and value is not None:
            value = enum_cls(value)
        kwargs[f.name] = value
    return cls(**kwargs)
