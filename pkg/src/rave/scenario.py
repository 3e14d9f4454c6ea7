"""Scenario files and the scripted baby model.

A scenario describes a session without hardware: piecewise gaze and
thermal channel segments (expanded to 120/50 Hz at run time), a behavior
timeline, probabilistic reaction rules that respond to agent behaviors,
an agent fault schedule, and the parent-joined condition. Channel noise
and reaction draws come from generators seeded by the scenario seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from .agents import FaultInjection
from .errors import InvalidScenario
from .events import Agent, Aoi, GazeSample, ThermalSample
from .gaze import AoiGeometry

SCENARIO_SCHEMA = 1

_LINE_KEY = "__line__"


class _LineLoader(yaml.SafeLoader):
    """SafeLoader that annotates every mapping with its 1-based line."""


def _construct_mapping(loader, node, deep=False):
    mapping = yaml.SafeLoader.construct_mapping(loader, node, deep=deep)
    mapping[_LINE_KEY] = node.start_mark.line + 1
    return mapping


_LineLoader.add_constructor(
    yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping
)


def _line(raw: Any) -> str:
    if isinstance(raw, dict) and _LINE_KEY in raw:
        return f"line {raw[_LINE_KEY]}"
    return "unknown line"


def _require(raw: dict, key: str, context: str) -> Any:
    if key not in raw:
        raise InvalidScenario(f"{context}: missing {key!r} ({_line(raw)})")
    return raw[key]


@dataclass(frozen=True)
class GazeSegment:
    from_ms: int
    to_ms: int
    target: str  # AOI label or "off" for tracking loss
    jitter: float = 0.005


@dataclass(frozen=True)
class ThermalSegment:
    from_ms: int
    to_ms: int
    start_c: float
    end_c: float
    noise_c: float = 0.0
    valid: bool = True


@dataclass(frozen=True)
class TimelineBehavior:
    at_ms: int
    label: str


@dataclass(frozen=True)
class ReactionRule:
    on_behavior: str
    channel: str  # aoi | behavior | thermal
    value: str
    p: float
    latency_ms: int
    duration_ms: int


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    duration_ms: int
    condition: str = "two_way"  # two_way | three_way
    parent_joined_at_ms: Optional[int] = None
    gaze: tuple[GazeSegment, ...] = ()
    thermal: tuple[ThermalSegment, ...] = ()
    behaviors: tuple[TimelineBehavior, ...] = ()
    reactions: tuple[ReactionRule, ...] = ()
    faults: tuple[FaultInjection, ...] = ()

    def validate(self) -> None:
        if self.duration_ms <= 0:
            raise InvalidScenario(f"{self.name}: duration must be positive")
        if self.condition not in ("two_way", "three_way"):
            raise InvalidScenario(f"{self.name}: condition must be two_way or three_way")
        if (self.condition == "three_way") != (self.parent_joined_at_ms is not None):
            raise InvalidScenario(
                f"{self.name}: parent_joined_at is required exactly when condition is three_way"
            )
        for segs, label in ((self.gaze, "gaze"), (self.thermal, "thermal")):
            last = -1
            for s in segs:
                if s.from_ms >= s.to_ms:
                    raise InvalidScenario(f"{self.name}: empty {label} segment at {s.from_ms}")
                if s.from_ms < last:
                    raise InvalidScenario(f"{self.name}: overlapping {label} segments")
                last = s.to_ms
        if any(b.at_ms < 0 for b in self.behaviors):
            raise InvalidScenario(f"{self.name}: behavior timestamps must be non-negative")
        if list(self.behaviors) != sorted(self.behaviors, key=lambda b: b.at_ms):
            raise InvalidScenario(f"{self.name}: behavior timeline must be sorted")
        for r in self.reactions:
            if not 0.0 <= r.p <= 1.0:
                raise InvalidScenario(f"{self.name}: reaction probability {r.p} not in [0,1]")
            if r.channel not in ("aoi", "behavior", "thermal"):
                raise InvalidScenario(f"{self.name}: unknown reaction channel {r.channel!r}")
        for s in self.thermal:
            if s.valid:
                for temp in (s.start_c, s.end_c):
                    if not 25.0 <= temp <= 40.0:
                        raise InvalidScenario(
                            f"{self.name}: temperature {temp} outside physiological bounds"
                        )


def load_scenario(path: Path) -> Scenario:
    try:
        raw = yaml.load(Path(path).read_text(), Loader=_LineLoader)
    except FileNotFoundError:
        raise InvalidScenario(f"scenario file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise InvalidScenario(f"{path}: not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise InvalidScenario(f"{path}: scenario must be a mapping")
    return scenario_from_dict(raw, context=str(path))


def scenario_from_dict(raw: dict[str, Any], context: str = "scenario") -> Scenario:
    schema = raw.get("schema", SCENARIO_SCHEMA)
    if schema != SCENARIO_SCHEMA:
        raise InvalidScenario(f"{context}: unsupported schema {schema} ({_line(raw)})")
    name = _require(raw, "name", context)
    seed = int(_require(raw, "seed", context))
    duration_ms = int(float(_require(raw, "duration_s", context)) * 1000)
    condition = raw.get("condition", "two_way")
    parent_ms = None
    if raw.get("parent_joined_at_s") is not None:
        parent_ms = int(float(raw["parent_joined_at_s"]) * 1000)

    baby = raw.get("baby", {}) or {}
    gaze = []
    for seg in baby.get("gaze", []) or []:
        target = _require(seg, "target", f"{context}.gaze")
        if target is False:  # YAML 1.1 parses a bare `off` as boolean
            target = "off"
        gaze.append(
            GazeSegment(
                from_ms=int(float(_require(seg, "from_s", f"{context}.gaze")) * 1000),
                to_ms=int(float(_require(seg, "to_s", f"{context}.gaze")) * 1000),
                target=str(target),
                jitter=float(seg.get("jitter", 0.005)),
            )
        )
    thermal = []
    for seg in baby.get("thermal", []) or []:
        ctx = f"{context}.thermal"
        if "ramp_c" in seg:
            ramp = seg["ramp_c"]
            if not isinstance(ramp, list) or len(ramp) != 2:
                raise InvalidScenario(f"{ctx}: ramp_c must be [start, end] ({_line(seg)})")
            start_c, end_c = float(ramp[0]), float(ramp[1])
        elif "level_c" in seg:
            start_c = end_c = float(seg["level_c"])
        else:
            raise InvalidScenario(f"{ctx}: segment needs level_c or ramp_c ({_line(seg)})")
        thermal.append(
            ThermalSegment(
                from_ms=int(float(_require(seg, "from_s", ctx)) * 1000),
                to_ms=int(float(_require(seg, "to_s", ctx)) * 1000),
                start_c=start_c,
                end_c=end_c,
                noise_c=float(seg.get("noise_c", 0.0)),
                valid=bool(seg.get("valid", True)),
            )
        )
    behaviors = [
        TimelineBehavior(
            at_ms=int(float(_require(b, "at_s", f"{context}.behaviors")) * 1000),
            label=str(_require(b, "label", f"{context}.behaviors")),
        )
        for b in baby.get("behaviors", []) or []
    ]
    reactions = [
        ReactionRule(
            on_behavior=str(_require(r, "trigger", f"{context}.reactions")),
            channel=str(_require(r, "channel", f"{context}.reactions")),
            value=str(_require(r, "value", f"{context}.reactions")),
            p=float(r.get("p", 1.0)),
            latency_ms=int(r.get("latency_ms", 1000)),
            duration_ms=int(r.get("duration_ms", 3000)),
        )
        for r in baby.get("reactions", []) or []
    ]
    faults = [
        FaultInjection(
            agent=Agent(_require(f, "agent", f"{context}.faults")),
            behavior=str(_require(f, "behavior", f"{context}.faults")),
            occurrence=int(f.get("occurrence", 1)),
            reason=str(f.get("reason", "injected")),
            after_ms=f.get("after_ms"),
        )
        for f in raw.get("faults", []) or []
    ]
    scenario = Scenario(
        name=str(name),
        seed=seed,
        duration_ms=duration_ms,
        condition=str(condition),
        parent_joined_at_ms=parent_ms,
        gaze=tuple(gaze),
        thermal=tuple(thermal),
        behaviors=tuple(behaviors),
        reactions=tuple(reactions),
        faults=tuple(faults),
    )
    scenario.validate()
    return scenario


@dataclass(frozen=True)
class Emission:
    """One scripted-baby output scheduled for a future instant."""

    due_ms: int
    channel: str
    value: str
    duration_ms: int


class ScriptedBaby:
    """Expands scenario channels into samples and fires reaction rules.

    Gaze samples sit at the center of the target region plus seeded
    jitter; "off" segments produce invalid samples; gaps default to the
    outside point. Reaction rules fire on observed agent behaviors with
    probability p after their latency, overriding the gaze track or
    injecting behaviors.
    """

    def __init__(
        self,
        scenario: Scenario,
        geometry: AoiGeometry,
        rng_gaze: np.random.Generator,
        rng_thermal: np.random.Generator,
        rng_react: np.random.Generator,
    ):
        self.scenario = scenario
        self.geometry = geometry
        self.rng_gaze = rng_gaze
        self.rng_thermal = rng_thermal
        self.rng_react = rng_react
        self._gaze_overrides: list[tuple[int, int, str]] = []
        self._thermal_overrides: list[tuple[int, int, float]] = []
        self._outside_point = self._find_outside_point()

    def _find_outside_point(self) -> tuple[float, float]:
        for x, y in ((0.99, 0.02), (0.02, 0.99), (0.99, 0.99), (0.02, 0.02), (0.5, 0.99)):
            if not any(r.contains(x, y) for r in self.geometry.regions.values()):
                return (x, y)
        raise InvalidScenario("AOI layout leaves no room for an outside gaze point")

    # --- gaze -------------------------------------------------------------

    def gaze_target_at(self, t_ms: float) -> tuple[str, float]:
        for from_ms, to_ms, label in reversed(self._gaze_overrides):
            if from_ms <= t_ms < to_ms:
                return label, 0.005
        for seg in self.scenario.gaze:
            if seg.from_ms <= t_ms < seg.to_ms:
                return seg.target, seg.jitter
        return Aoi.OUTSIDE.value, 0.005

    def gaze_samples(self, from_ms: int, to_ms: int, rate_hz: int) -> list[GazeSample]:
        period = 1000.0 / rate_hz
        n = round((to_ms - from_ms) / period)
        times = [from_ms + i * period for i in range(n)]
        regimes = [self.gaze_target_at(t) for t in times]
        samples: list[GazeSample] = []
        i = 0
        while i < n:
            j = i
            while j < n and regimes[j] == regimes[i]:
                j += 1
            target, jitter = regimes[i]
            if target == "off":
                samples.extend(GazeSample(t=times[k], x=0.0, y=0.0, valid=False) for k in range(i, j))
            else:
                if target == Aoi.OUTSIDE.value:
                    cx, cy = self._outside_point
                else:
                    cx, cy = self.geometry.regions[Aoi(target)].center()
                noise = self.rng_gaze.normal(0.0, jitter, size=(j - i, 2))
                xs = np.clip(cx + noise[:, 0], 0.0, 1.0)
                ys = np.clip(cy + noise[:, 1], 0.0, 1.0)
                samples.extend(
                    GazeSample(t=times[k], x=float(xs[k - i]), y=float(ys[k - i]), valid=True)
                    for k in range(i, j)
                )
            i = j
        return samples

    # --- thermal ----------------------------------------------------------

    def thermal_samples(self, from_ms: int, to_ms: int, rate_hz: int) -> list[ThermalSample]:
        period = 1000.0 / rate_hz
        n = round((to_ms - from_ms) / period)
        times = [from_ms + i * period for i in range(n)]
        base = [self._thermal_at(t) for t in times]
        sigmas = [self._noise_at(t) if base[i][1] else 0.0 for i, t in enumerate(times)]
        samples: list[ThermalSample] = []
        i = 0
        while i < n:
            j = i
            while j < n and sigmas[j] == sigmas[i]:
                j += 1
            if sigmas[i] > 0.0:
                noise = self.rng_thermal.normal(0.0, sigmas[i], size=j - i)
                samples.extend(
                    ThermalSample(t=times[k], temp=base[k][0] + float(noise[k - i]), valid=base[k][1])
                    for k in range(i, j)
                )
            else:
                samples.extend(
                    ThermalSample(t=times[k], temp=base[k][0], valid=base[k][1])
                    for k in range(i, j)
                )
            i = j
        return samples

    def _thermal_at(self, t_ms: float) -> tuple[float, bool]:
        base = (34.0, True)
        for seg in self.scenario.thermal:
            if seg.from_ms <= t_ms < seg.to_ms:
                frac = (t_ms - seg.from_ms) / (seg.to_ms - seg.from_ms)
                base = (seg.start_c + frac * (seg.end_c - seg.start_c), seg.valid)
                break
        temp, valid = base
        for from_ms, to_ms, delta in self._thermal_overrides:
            if from_ms <= t_ms < to_ms:
                frac = (t_ms - from_ms) / (to_ms - from_ms)
                temp += frac * delta
        return temp, valid

    def _noise_at(self, t_ms: float) -> float:
        for seg in self.scenario.thermal:
            if seg.from_ms <= t_ms < seg.to_ms:
                return seg.noise_c
        return 0.0

    # --- reactions ----------------------------------------------------------

    def react(self, behavior: str, t_ms: int) -> list[Emission]:
        """Fire matching reaction rules; one seeded draw per matching rule."""
        emissions = []
        for rule in self.scenario.reactions:
            if rule.on_behavior != behavior:
                continue
            if float(self.rng_react.random()) < rule.p:
                emissions.append(
                    Emission(
                        due_ms=t_ms + rule.latency_ms,
                        channel=rule.channel,
                        value=rule.value,
                        duration_ms=rule.duration_ms,
                    )
                )
        return emissions

    def apply_emission(self, emission: Emission) -> Optional[str]:
        """Install channel overrides; returns a behavior label to publish."""
        if emission.channel == "aoi":
            self._gaze_overrides.append(
                (emission.due_ms, emission.due_ms + emission.duration_ms, emission.value)
            )
            return None
        if emission.channel == "thermal":
            delta = 0.2 if emission.value == "warm" else -0.2
            self._thermal_overrides.append(
                (emission.due_ms, emission.due_ms + emission.duration_ms, delta)
            )
            return None
        return emission.value
