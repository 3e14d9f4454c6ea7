"""Exception hierarchy shared by all rave modules.

Every error carries a stable ``code`` string so the CLI can emit
machine-parsable error lines without string matching on messages.
"""

from __future__ import annotations


class RaveError(Exception):
    """Base class; ``code`` identifies the error family."""

    code = "Error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


# --- event bus ---------------------------------------------------------


class UnregisteredTopic(RaveError):
    code = "UnregisteredTopic"


class SessionNotStarted(RaveError):
    code = "SessionNotStarted"


class MalformedPattern(RaveError):
    code = "MalformedPattern"


class SubscriptionClosed(RaveError):
    code = "SubscriptionClosed"


# --- gaze perception ---------------------------------------------------


class DegenerateCalibration(RaveError):
    code = "DegenerateCalibration"


class InsufficientPoints(RaveError):
    code = "InsufficientPoints"


class InvalidSample(RaveError):
    code = "InvalidSample"


class WrongWindowSize(RaveError):
    code = "WrongWindowSize"


# --- thermal perception ------------------------------------------------


class InsufficientValidSamples(RaveError):
    code = "InsufficientValidSamples"


# --- behavior taxonomy -------------------------------------------------


class UnknownLabel(RaveError):
    code = "UnknownLabel"


class CatalogInvalid(RaveError):
    code = "CatalogInvalid"


# --- dialogue manager / policy ----------------------------------------


class StaleEvent(RaveError):
    code = "StaleEvent"


class NoMatchingRule(RaveError):
    code = "NoMatchingRule"


class PolicyIncomplete(RaveError):
    code = "PolicyIncomplete"


class PolicyInvalid(RaveError):
    code = "PolicyInvalid"


class UnknownRhyme(RaveError):
    code = "UnknownRhyme"


# --- agent executors ---------------------------------------------------


class AgentBusy(RaveError):
    code = "AgentBusy"


class UnknownBehavior(RaveError):
    code = "UnknownBehavior"


class NotARhyme(RaveError):
    code = "NotARhyme"


# --- sim harness -------------------------------------------------------


class InvalidScenario(RaveError):
    code = "InvalidScenario"


class HashMismatch(RaveError):
    code = "HashMismatch"


class DivergenceAt(RaveError):
    code = "DivergenceAt"

    def __init__(self, index: int, message: str = ""):
        self.index = index
        super().__init__(message or f"divergence at record index {index}")


class ConfigInvalid(RaveError):
    code = "ConfigInvalid"
