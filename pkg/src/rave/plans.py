"""Timed action-plan library for the two agents.

A plan is an ordered list of primitive steps. Steps either chain after the
previous step's terminal signal (AFTER_PREVIOUS) or carry a start offset
from plan start, which lets one agent act while the other is mid-primitive
(the robot's mid-rhyme nod). Offsets are computed from the behavior
catalog's configured durations at instantiation time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .agents import RHYMES, AgentBehaviorCatalog
from .errors import UnknownRhyme
from .events import Agent, EpisodeKind

AFTER_PREVIOUS = -1


@dataclass(frozen=True)
class PlanStep:
    agent: Agent
    behavior: str
    target: str = "Baby"
    offset_ms: int = AFTER_PREVIOUS  # AFTER_PREVIOUS or ms from plan start


@dataclass(frozen=True)
class ActionPlan:
    id: str
    episode: EpisodeKind
    steps: tuple[PlanStep, ...]
    provenance: str
    rhyme: str = ""

    def __post_init__(self):
        if not self.steps:
            raise ValueError("plans must carry at least one step")

    def describe(self) -> str:
        names = ", ".join(f"{s.agent.value}:{s.behavior}" for s in self.steps)
        return f"{self.episode.value}[{self.provenance}] {names}"


class PlanLibrary:
    """Instantiates plan templates against the configured behavior catalog."""

    def __init__(
        self,
        catalog: AgentBehaviorCatalog,
        rng: Optional[np.random.Generator] = None,
        robot_gaze_to_avatar: str = "GazeRight",
        avatar_gaze_to_robot: str = "GazeLeft",
    ):
        self.catalog = catalog
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.robot_to_avatar = robot_gaze_to_avatar
        self.avatar_to_robot = avatar_gaze_to_robot
        self._counter = 0
        self.templates = {
            "familiarization": self.familiarization_plan,
            "nursery_rhyme": self.nursery_rhyme_plan,
            "attention_getting": self.attention_getting_plan,
            "attention_then_rhyme": self.attention_then_rhyme_plan,
            "soothing": self.soothing_plan,
            "robot_engage_shift": self.robot_engage_shift_plan,
            "robot_engage_handoff": self.robot_engage_handoff_plan,
            "social_routines_questions": self.social_routines_questions_plan,
            "question_solicitation": self.question_solicitation_plan,
            "avatar_respond_robot_watch": self.avatar_respond_robot_watch_plan,
            "social_referencing": self.social_referencing_plan,
        }

    def _next_id(self) -> str:
        self._counter += 1
        return f"plan-{self._counter}"

    def _dur(self, agent: Agent, behavior: str) -> int:
        return self.catalog.duration(agent, behavior)

    def build(self, template: str, provenance: str, rhyme: str = "") -> ActionPlan:
        factory = self.templates[template]
        if template in ("nursery_rhyme", "attention_then_rhyme"):
            return factory(rhyme, provenance=provenance)
        return factory(provenance=provenance)

    # --- episode openers --------------------------------------------------

    def familiarization_plan(self, provenance: str = "familiarization") -> ActionPlan:
        """The fixed opening sequence introducing both agents.

        Robot wakes, nods to the baby, turns to the avatar; the avatar
        acknowledges, turns back to the baby, waves, and signs the
        morning greeting; the robot turns back to the baby.
        """
        steps = (
            PlanStep(Agent.ROBOT, "WakeUp"),
            PlanStep(Agent.ROBOT, "Nod", target="Baby"),
            PlanStep(Agent.ROBOT, self.robot_to_avatar, target="Avatar"),
            PlanStep(Agent.AVATAR, self.avatar_to_robot, target="Robot"),
            PlanStep(Agent.AVATAR, "Nod", target="Robot"),
            PlanStep(Agent.AVATAR, "GazeForward", target="Baby"),
            PlanStep(Agent.AVATAR, "Wave", target="Baby"),
            PlanStep(Agent.AVATAR, "GoodMorning", target="Both"),
            PlanStep(Agent.ROBOT, "GazeForward", target="Baby"),
        )
        return ActionPlan(self._next_id(), EpisodeKind.FAMILIARIZATION, steps, provenance)

    def nursery_rhyme_plan(self, rhyme: str, provenance: str = "nursery_rhyme") -> ActionPlan:
        """Triad greeting, the rhyme with a mid-rhyme robot nod, and a filler."""
        if rhyme not in RHYMES:
            raise UnknownRhyme(f"no rhyme named {rhyme!r}; known: {RHYMES}")
        return self._rhyme_steps(rhyme, provenance, prefix=())

    def attention_then_rhyme_plan(self, rhyme: str, provenance: str = "attention_then_rhyme") -> ActionPlan:
        """Attention-getting prefix, then the full rhyme sequence."""
        if rhyme not in RHYMES:
            raise UnknownRhyme(f"no rhyme named {rhyme!r}; known: {RHYMES}")
        prefix = (
            PlanStep(Agent.AVATAR, "LookAtMe", target="Baby"),
            PlanStep(Agent.AVATAR, "Wave", target="Baby"),
        )
        return self._rhyme_steps(rhyme, provenance, prefix=prefix)

    def _rhyme_steps(self, rhyme: str, provenance: str, prefix: tuple[PlanStep, ...]) -> ActionPlan:
        d = self._dur
        prefix_ms = sum(d(s.agent, s.behavior) for s in prefix)
        # Triad greeting: the agents turn to each other, nod simultaneously,
        # the avatar takes the floor and turns back to the baby.
        greet_turns = prefix_ms + d(Agent.AVATAR, self.avatar_to_robot) + d(Agent.ROBOT, self.robot_to_avatar)
        nods_end = greet_turns + max(d(Agent.AVATAR, "Nod"), d(Agent.ROBOT, "Nod"))
        rhyme_start = (
            nods_end
            + d(Agent.AVATAR, "LookAtMe")
            + d(Agent.AVATAR, "Ready")
            + d(Agent.AVATAR, "GazeForward")
        )
        rhyme_ms = d(Agent.AVATAR, rhyme)
        steps = prefix + (
            PlanStep(Agent.AVATAR, self.avatar_to_robot, target="Robot"),
            PlanStep(Agent.ROBOT, self.robot_to_avatar, target="Avatar"),
            PlanStep(Agent.AVATAR, "Nod", target="Robot", offset_ms=greet_turns),
            PlanStep(Agent.ROBOT, "Nod", target="Avatar", offset_ms=greet_turns),
            PlanStep(Agent.AVATAR, "LookAtMe", target="Both", offset_ms=nods_end),
            PlanStep(Agent.AVATAR, "Ready", target="Both"),
            PlanStep(Agent.AVATAR, "GazeForward", target="Baby"),
            PlanStep(Agent.AVATAR, rhyme, target="Baby"),
            PlanStep(Agent.ROBOT, "Nod", target="Avatar", offset_ms=rhyme_start + rhyme_ms // 2),
            PlanStep(Agent.AVATAR, "Nod", target="Baby"),
        )
        return ActionPlan(
            self._next_id(), EpisodeKind.NURSERY_RHYME, steps, provenance, rhyme=rhyme
        )

    # --- contingent responses ---------------------------------------------

    def attention_getting_plan(self, provenance: str = "attention_getting") -> ActionPlan:
        steps = (
            PlanStep(Agent.AVATAR, "LookAtMe", target="Baby"),
            PlanStep(Agent.AVATAR, "Wave", target="Baby"),
        )
        return ActionPlan(self._next_id(), EpisodeKind.ATTENTION_GETTING, steps, provenance)

    def soothing_plan(self, provenance: str = "soothing") -> ActionPlan:
        """Avatar engages a distressed baby; the response draws from the
        soothing repertoire using the seeded session generator."""
        pick = ("What", "WhatsWrong", "Peekaboo")[int(self.rng.integers(3))]
        steps = (
            PlanStep(Agent.AVATAR, "GazeForward", target="Baby"),
            PlanStep(Agent.AVATAR, pick, target="Baby"),
        )
        return ActionPlan(self._next_id(), EpisodeKind.SOOTHING, steps, provenance)

    def robot_engage_shift_plan(self, provenance: str = "robot_engage_shift") -> ActionPlan:
        """Robot engages a distressed baby, then shifts its gaze toward the
        avatar so the baby follows; the avatar picks up."""
        steps = (
            PlanStep(Agent.ROBOT, "Nod", target="Baby"),
            PlanStep(Agent.ROBOT, "Blink", target="Baby"),
            PlanStep(Agent.ROBOT, self.robot_to_avatar, target="Avatar"),
            PlanStep(Agent.AVATAR, "Wave", target="Baby"),
        )
        return ActionPlan(self._next_id(), EpisodeKind.SOOTHING, steps, provenance)

    def robot_engage_handoff_plan(self, provenance: str = "robot_engage_handoff") -> ActionPlan:
        """Robot acknowledges the baby, turns to the avatar; avatar takes over."""
        steps = (
            PlanStep(Agent.ROBOT, "Nod", target="Baby"),
            PlanStep(Agent.ROBOT, self.robot_to_avatar, target="Avatar"),
            PlanStep(Agent.AVATAR, "LookAtMe", target="Baby"),
            PlanStep(Agent.AVATAR, "Wave", target="Baby"),
        )
        return ActionPlan(self._next_id(), EpisodeKind.ATTENTION_GETTING, steps, provenance)

    def social_routines_questions_plan(self, provenance: str = "social_routines_questions") -> ActionPlan:
        routine = ("Peekaboo", "Hello")[int(self.rng.integers(2))]
        question = ("What", "WhatsThat")[int(self.rng.integers(2))]
        steps = (
            PlanStep(Agent.AVATAR, routine, target="Baby"),
            PlanStep(Agent.AVATAR, question, target="Baby"),
        )
        return ActionPlan(self._next_id(), EpisodeKind.SOOTHING, steps, provenance)

    def question_solicitation_plan(self, provenance: str = "question_solicitation") -> ActionPlan:
        """Avatar solicits while the robot engages the baby in parallel."""
        steps = (
            PlanStep(Agent.AVATAR, "WhatsWrong", target="Baby", offset_ms=0),
            PlanStep(Agent.ROBOT, "Nod", target="Baby", offset_ms=0),
            PlanStep(Agent.AVATAR, "What", target="Baby"),
        )
        return ActionPlan(self._next_id(), EpisodeKind.SOOTHING, steps, provenance)

    def avatar_respond_robot_watch_plan(self, provenance: str = "avatar_respond_robot_watch") -> ActionPlan:
        """Avatar responds; robot looks at the avatar and nods along."""
        steps = (
            PlanStep(Agent.AVATAR, "WhatsWrong", target="Baby", offset_ms=0),
            PlanStep(Agent.ROBOT, self.robot_to_avatar, target="Avatar", offset_ms=0),
            PlanStep(Agent.ROBOT, "Nod", target="Avatar"),
            PlanStep(Agent.AVATAR, "Peekaboo", target="Baby"),
        )
        return ActionPlan(self._next_id(), EpisodeKind.SOOTHING, steps, provenance)

    def social_referencing_plan(
        self, provenance: str = "social_referencing", wait_ms: int = 2000
    ) -> ActionPlan:
        """Attention recovery after the baby looks away to the parent:
        the avatar signs attend-to-me, waits, then waves."""
        lookatme = self._dur(Agent.AVATAR, "LookAtMe")
        steps = (
            PlanStep(Agent.AVATAR, "LookAtMe", target="Baby"),
            PlanStep(Agent.AVATAR, "Wave", target="Baby", offset_ms=lookatme + wait_ms),
        )
        return ActionPlan(self._next_id(), EpisodeKind.ATTENTION_GETTING, steps, provenance)
