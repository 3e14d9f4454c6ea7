"""Runtime configuration: one dataclass tree, a YAML loader, RAVE_ env
overrides, and a canonical hash that ties traces to the exact tunables
they were produced under.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from pathlib import Path
from typing import Any, Optional

import yaml

from .errors import ConfigInvalid
from .events import Aoi
from .gaze import DEFAULT_LAYOUT, AoiGeometry, FixationParams, Rect
from .manager import TimerConfig
from .thermal import ThermalParams


@dataclass(frozen=True)
class AoiConfig:
    regions: dict[str, list[float]] = field(
        default_factory=lambda: {
            label.value: [r.x0, r.y0, r.x1, r.y1] for label, r in DEFAULT_LAYOUT.items()
        }
    )
    tiebreak: list[str] = field(
        default_factory=lambda: ["Avatar", "Robot", "InBetween", "Outside"]
    )
    fixation_containment: float = 0.75
    fixation_dispersion: float = 0.05
    min_valid_fraction: float = 0.5
    sample_rate_hz: int = 120

    def geometry(self) -> AoiGeometry:
        regions = {Aoi(name): Rect(*coords) for name, coords in self.regions.items()}
        return AoiGeometry(regions=regions, tiebreak=tuple(Aoi(t) for t in self.tiebreak))

    def fixation(self) -> FixationParams:
        return FixationParams(self.fixation_containment, self.fixation_dispersion)


@dataclass(frozen=True)
class ThermalConfig:
    window_s: float = 10.0
    hop_s: float = 1.0
    deadband: float = 0.003
    sustain: int = 3
    min_valid_fraction: float = 0.8
    sample_rate_hz: int = 50

    def params(self) -> ThermalParams:
        return ThermalParams(
            window_s=self.window_s,
            hop_s=self.hop_s,
            deadband=self.deadband,
            sustain=self.sustain,
            min_valid_fraction=self.min_valid_fraction,
            sample_rate_hz=self.sample_rate_hz,
        )


@dataclass(frozen=True)
class TimersConfig:
    idle_timeout_ms: int = 8000
    episode_timeout_ms: int = 30000
    behavior_watchdog_ms: int = 15000

    def params(self) -> TimerConfig:
        return TimerConfig(
            idle_timeout_ms=self.idle_timeout_ms,
            episode_timeout_ms=self.episode_timeout_ms,
            behavior_watchdog_ms=self.behavior_watchdog_ms,
        )


@dataclass(frozen=True)
class AgentsConfig:
    durations: dict[str, dict[str, int]] = field(default_factory=dict)
    rhyme_padding_ms: float = 0.0
    robot_gaze_to_avatar: str = "GazeRight"
    avatar_gaze_to_robot: str = "GazeLeft"
    social_referencing_wait_ms: int = 2000


@dataclass(frozen=True)
class SessionSection:
    reorder_tolerance_ms: int = 250
    reaction_default_latency_ms: int = 1000
    reaction_default_duration_ms: int = 3000


@dataclass(frozen=True)
class RaveConfig:
    aoi: AoiConfig = field(default_factory=AoiConfig)
    thermal: ThermalConfig = field(default_factory=ThermalConfig)
    timers: TimersConfig = field(default_factory=TimersConfig)
    agents: AgentsConfig = field(default_factory=AgentsConfig)
    session: SessionSection = field(default_factory=SessionSection)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


_SECTIONS = {f.name: f.type for f in fields(RaveConfig)}


def _build_section(cls, data: dict, path: str):
    known = {f.name: f for f in fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise ConfigInvalid(f"unknown keys {sorted(unknown)} in config section {path!r}")
    return cls(**data)


def config_from_dict(data: dict[str, Any]) -> RaveConfig:
    if not isinstance(data, dict):
        raise ConfigInvalid("config root must be a mapping")
    sections = {}
    classes = {
        "aoi": AoiConfig,
        "thermal": ThermalConfig,
        "timers": TimersConfig,
        "agents": AgentsConfig,
        "session": SessionSection,
    }
    unknown = set(data) - set(classes)
    if unknown:
        raise ConfigInvalid(f"unknown config sections {sorted(unknown)}")
    for name, cls in classes.items():
        raw = data.get(name, {}) or {}
        if not isinstance(raw, dict):
            raise ConfigInvalid(f"config section {name!r} must be a mapping")
        sections[name] = _build_section(cls, raw, name)
    return RaveConfig(**sections)


def load_config(path: Optional[Path] = None, env: Optional[dict[str, str]] = None) -> RaveConfig:
    """Load config from YAML (defaults when absent) and apply RAVE_ env vars.

    Overrides use RAVE_<SECTION>_<KEY>, e.g. RAVE_TIMERS_IDLE_TIMEOUT_MS=5000.
    """
    data: dict[str, Any] = {}
    if path is not None:
        try:
            loaded = yaml.safe_load(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigInvalid(f"config file not found: {path}") from None
        except yaml.YAMLError as exc:
            raise ConfigInvalid(f"config file is not valid YAML: {exc}") from exc
        if loaded is not None:
            data = loaded
    env = os.environ if env is None else env
    for key, value in sorted(env.items()):
        if not key.startswith("RAVE_"):
            continue
        rest = key[len("RAVE_") :].lower()
        section = next((s for s in _SECTIONS if rest.startswith(s + "_")), None)
        if section is None:
            continue
        field_name = rest[len(section) + 1 :]
        data.setdefault(section, {})
        data[section][field_name] = yaml.safe_load(value)
    return config_from_dict(data)
