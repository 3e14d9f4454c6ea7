"""Hardware-free multiparty dialogue manager for a robot + avatar pair.

The package fuses simulated (or operator-injected) gaze, thermal, and
baby-behavior signals into an information state, selects socially
contingent action plans through a rule policy, executes timed behavior
sequences with baby-behavior-only preemption, and records deterministic,
replayable session traces.
"""

from .behaviors import BehaviorCatalog, load_catalog
from .bus import TOPICS, BusMessage, EventBus
from .clock import SessionClock
from .config import RaveConfig, load_config
from .events import (
    Agent,
    AgentCommand,
    AgentLifecycleSignal,
    Aoi,
    AoiWindowEvent,
    BabyBehaviorEvent,
    EpisodeKind,
    GazeSample,
    Phase,
    Readiness,
    ReadinessEvent,
    SessionControl,
    ThermalSample,
    TimerKind,
    TimerSignal,
)
from .gaze import AoiGeometry, calibrate, classify_point, classify_window, detect_fixation
from .manager import DialogueManager, InformationState
from .plans import ActionPlan, PlanLibrary, PlanStep
from .policy import PolicyTable, check_policy_coverage, load_policy
from .scenario import Scenario, ScriptedBaby, load_scenario
from .session import ReplayReport, SessionResult, replay, run_session
from .thermal import ThermalClassifier, classify_history, estimate_slope, run_thermal_stream
from .trace import SessionTrace, read_trace, render_timeline

__version__ = "0.1.0"

__all__ = [
    "ActionPlan",
    "Agent",
    "AgentCommand",
    "AgentLifecycleSignal",
    "Aoi",
    "AoiGeometry",
    "AoiWindowEvent",
    "BabyBehaviorEvent",
    "BehaviorCatalog",
    "BusMessage",
    "DialogueManager",
    "EpisodeKind",
    "EventBus",
    "GazeSample",
    "InformationState",
    "Phase",
    "PlanLibrary",
    "PlanStep",
    "PolicyTable",
    "RaveConfig",
    "Readiness",
    "ReadinessEvent",
    "ReplayReport",
    "Scenario",
    "ScriptedBaby",
    "SessionClock",
    "SessionControl",
    "SessionResult",
    "SessionTrace",
    "ThermalClassifier",
    "ThermalSample",
    "TimerKind",
    "TimerSignal",
    "TOPICS",
    "calibrate",
    "check_policy_coverage",
    "classify_history",
    "classify_point",
    "classify_window",
    "detect_fixation",
    "estimate_slope",
    "load_catalog",
    "load_config",
    "load_policy",
    "load_scenario",
    "read_trace",
    "render_timeline",
    "replay",
    "run_session",
    "run_thermal_stream",
]
