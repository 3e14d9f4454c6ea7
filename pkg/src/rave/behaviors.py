"""Closed 23-label baby-behavior catalog and event validation.

The catalog ships as a data file so the label set can be revised without
code changes; the loader enforces the structural invariants (exactly 23
labels, valid categories, required policy-class members).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

from .errors import CatalogInvalid, UnknownLabel
from .events import BabyBehaviorEvent

CATEGORIES = (
    "Vocalization",
    "SocialCommunicativeGesture",
    "SocialRoutine",
    "SocialManualAction",
)

POLICY_CLASSES = ("Distress", "Engaged", "Neutral")

# Labels whose class assignment is fixed by the policy's distress and
# engaged branches; the loader refuses catalogs that move them.
_REQUIRED_DISTRESS = {"Vegetative", "Crying", "Fussing"}
_REQUIRED_ENGAGED = {"Attention", "Signs", "Waving", "Babbling", "Reaching", "Pointing"}

EXPECTED_LABEL_COUNT = 23


@dataclass(frozen=True)
class CatalogEntry:
    label: str
    category: str
    policy_class: str


class BehaviorCatalog:
    """Immutable lookup from label to category and policy class."""

    def __init__(self, entries: list[CatalogEntry]):
        self._entries = {e.label: e for e in entries}
        self._validate(entries)

    def _validate(self, entries: list[CatalogEntry]) -> None:
        if len(entries) != EXPECTED_LABEL_COUNT:
            raise CatalogInvalid(f"catalog has {len(entries)} labels, expected {EXPECTED_LABEL_COUNT}")
        if len(self._entries) != len(entries):
            raise CatalogInvalid("duplicate labels in catalog")
        for e in entries:
            if e.category not in CATEGORIES:
                raise CatalogInvalid(f"unknown category {e.category!r} for {e.label}")
            if e.policy_class not in POLICY_CLASSES:
                raise CatalogInvalid(f"unknown policy class {e.policy_class!r} for {e.label}")
        distress = {e.label for e in entries if e.policy_class == "Distress"}
        engaged = {e.label for e in entries if e.policy_class == "Engaged"}
        if not _REQUIRED_DISTRESS <= distress:
            raise CatalogInvalid(f"distress class must include {sorted(_REQUIRED_DISTRESS)}")
        if not _REQUIRED_ENGAGED <= engaged:
            raise CatalogInvalid(f"engaged class must include {sorted(_REQUIRED_ENGAGED)}")

    @property
    def labels(self) -> list[str]:
        return list(self._entries)

    def __contains__(self, label: str) -> bool:
        return label in self._entries

    def entry(self, label: str) -> CatalogEntry:
        try:
            return self._entries[label]
        except KeyError:
            raise UnknownLabel(f"behavior label {label!r} is not in the catalog") from None

    def category(self, label: str) -> str:
        return self.entry(label).category

    def policy_class(self, label: str) -> str:
        return self.entry(label).policy_class

    def by_category(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {c: [] for c in CATEGORIES}
        for e in self._entries.values():
            out[e.category].append(e.label)
        return out

    def validate_event(self, raw: dict, origin: str = "scripted") -> BabyBehaviorEvent:
        """Attach category to a raw {t, label} event; UnknownLabel otherwise."""
        entry = self.entry(raw["label"])
        return BabyBehaviorEvent(
            t=int(raw["t"]), label=entry.label, category=entry.category, origin=origin
        )


def load_catalog(path: Optional[Path] = None) -> BehaviorCatalog:
    if path is None:
        text = resources.files("rave.data").joinpath("behavior_catalog.json").read_text()
    else:
        text = Path(path).read_text()
    data = json.loads(text)
    entries = [
        CatalogEntry(e["label"], e["category"], e["policy_class"])
        for e in data["entries"]
    ]
    return BehaviorCatalog(entries)
