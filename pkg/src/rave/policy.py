"""Rule-based action policy: ordered first-match-wins guards over the
information state, with exhaustive coverage checking.

Readiness collapses to three classes for guard matching: Positive and
VeryPositive are parasympathetic, Negative and VeryNegative sympathetic,
None neutral. Coverage enumerates every (aoi, readiness, behavior-or-
absent) combination — 4 x 5 x 24 = 480 checks over the 460-combination
baseline state space — and reports the matching rule for each.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import yaml

from .behaviors import BehaviorCatalog
from .errors import NoMatchingRule, PolicyInvalid
from .events import Aoi, EpisodeKind, Readiness

READINESS_CLASS = {
    Readiness.POSITIVE: "Parasympathetic",
    Readiness.VERY_POSITIVE: "Parasympathetic",
    Readiness.NEGATIVE: "Sympathetic",
    Readiness.VERY_NEGATIVE: "Sympathetic",
    Readiness.NONE: "Neutral",
}

PLAN_TEMPLATES = (
    "familiarization",
    "nursery_rhyme",
    "attention_getting",
    "attention_then_rhyme",
    "soothing",
    "robot_engage_shift",
    "robot_engage_handoff",
    "social_routines_questions",
    "question_solicitation",
    "avatar_respond_robot_watch",
    "social_referencing",
    "wait",
)

_GUARD_KEYS = {
    "aoi",
    "readiness",
    "behavior_class",
    "behavior_label",
    "episode",
    "episode_not",
    "fixated",
}


@dataclass(frozen=True)
class GuardInput:
    """The state projection a rule guard is evaluated against."""

    aoi: Aoi
    readiness: Readiness
    behavior_label: Optional[str]  # None when no behavior is pending
    behavior_class: Optional[str]
    episode: EpisodeKind = EpisodeKind.IDLE
    fixated: bool = False


@dataclass(frozen=True)
class PolicyRule:
    id: str
    plan: str
    aoi: Optional[frozenset[str]] = None
    readiness: Optional[frozenset[str]] = None
    behavior_class: Optional[frozenset[str]] = None
    behavior_label: Optional[frozenset[str]] = None
    episode: Optional[frozenset[str]] = None
    episode_not: Optional[frozenset[str]] = None
    fixated: Optional[bool] = None

    def matches(self, g: GuardInput) -> bool:
        if self.aoi is not None and g.aoi.value not in self.aoi:
            return False
        if self.readiness is not None and READINESS_CLASS[g.readiness] not in self.readiness:
            return False
        if self.behavior_class is not None:
            have = g.behavior_class if g.behavior_class is not None else "Absent"
            if have not in self.behavior_class:
                return False
        if self.behavior_label is not None and g.behavior_label not in self.behavior_label:
            return False
        if self.episode is not None and g.episode.value not in self.episode:
            return False
        if self.episode_not is not None and g.episode.value in self.episode_not:
            return False
        if self.fixated is not None and g.fixated != self.fixated:
            return False
        return True


@dataclass
class PolicyTable:
    rules: list[PolicyRule]

    def first_match(self, g: GuardInput) -> PolicyRule:
        for rule in self.rules:
            if rule.matches(g):
                return rule
        raise NoMatchingRule(f"no rule matches {g}")


@dataclass
class CoverageReport:
    total: int
    covered: int
    baseline: int  # combinations with a concrete behavior label
    uncovered: list[tuple[str, str, str]]
    matches: dict[tuple[str, str, str], str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.covered == self.total

    def rule_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for rule_id in self.matches.values():
            counts[rule_id] = counts.get(rule_id, 0) + 1
        return counts


def check_policy_coverage(policy: PolicyTable, catalog: BehaviorCatalog) -> CoverageReport:
    """Enumerate every (aoi, readiness, behavior-or-absent) combination."""
    behaviors: list[Optional[str]] = list(catalog.labels)
    baseline = len(Aoi) * len(Readiness) * len(behaviors)
    behaviors.append(None)
    uncovered = []
    matches = {}
    for aoi in Aoi:
        for readiness in Readiness:
            for label in behaviors:
                g = GuardInput(
                    aoi=aoi,
                    readiness=readiness,
                    behavior_label=label,
                    behavior_class=catalog.policy_class(label) if label else None,
                )
                key = (aoi.value, readiness.value, label or "<absent>")
                try:
                    matches[key] = policy.first_match(g).id
                except NoMatchingRule:
                    uncovered.append(key)
    total = len(Aoi) * len(Readiness) * len(behaviors)
    return CoverageReport(
        total=total,
        covered=total - len(uncovered),
        baseline=baseline,
        uncovered=uncovered,
        matches=matches,
    )


def _as_rule(raw: dict, index: int) -> PolicyRule:
    if "id" not in raw or "plan" not in raw:
        raise PolicyInvalid(f"rule #{index} needs 'id' and 'plan'")
    if raw["plan"] not in PLAN_TEMPLATES:
        raise PolicyInvalid(f"rule {raw['id']!r}: unknown plan template {raw['plan']!r}")
    when = raw.get("when", {}) or {}
    unknown = set(when) - _GUARD_KEYS
    if unknown:
        raise PolicyInvalid(f"rule {raw['id']!r}: unknown guard keys {sorted(unknown)}")

    def fset(key):
        value = when.get(key)
        if value is None:
            return None
        if isinstance(value, str):
            value = [value]
        return frozenset(value)

    return PolicyRule(
        id=raw["id"],
        plan=raw["plan"],
        aoi=fset("aoi"),
        readiness=fset("readiness"),
        behavior_class=fset("behavior_class"),
        behavior_label=fset("behavior_label"),
        episode=fset("episode"),
        episode_not=fset("episode_not"),
        fixated=when.get("fixated"),
    )


def load_policy(path: Optional[Path] = None) -> PolicyTable:
    if path is None:
        text = resources.files("rave.data").joinpath("default_policy.yaml").read_text()
    else:
        text = Path(path).read_text()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise PolicyInvalid(f"policy file is not valid YAML: {exc}") from exc
    if not isinstance(data, dict) or "rules" not in data:
        raise PolicyInvalid("policy file must be a mapping with a 'rules' list")
    rules_raw = data["rules"]
    if not isinstance(rules_raw, list) or not rules_raw:
        raise PolicyInvalid("policy 'rules' must be a non-empty list")
    rules = [_as_rule(r, i) for i, r in enumerate(rules_raw)]
    ids = [r.id for r in rules]
    if len(set(ids)) != len(ids):
        raise PolicyInvalid("duplicate rule ids in policy file")
    return PolicyTable(rules)
