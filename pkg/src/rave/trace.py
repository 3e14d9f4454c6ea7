"""Append-only session traces: line-delimited records with a content hash.

A trace file is one header line, one line per bus message in global
(timestamp, topic, seq) order, and a footer carrying the sha256 of the
canonical serialization of everything above it. Identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .bus import BusMessage
from .errors import HashMismatch, InvalidScenario
from .events import payload_from_dict, payload_to_dict

TRACE_FORMAT = "rave-trace"
TRACE_VERSION = 1
ARTIFACT_VERSION = "0.1.0"


def _canonical(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass
class SessionTrace:
    header: dict[str, Any]
    records: list[BusMessage] = field(default_factory=list)

    def sort_records(self) -> None:
        self.records.sort(key=lambda m: (m.timestamp, m.topic, m.seq))

    def record_lines(self) -> list[str]:
        return [
            _canonical(
                {
                    "t": m.timestamp,
                    "topic": m.topic,
                    "seq": m.seq,
                    "source": m.source,
                    "payload": payload_to_dict(m.payload),
                }
            )
            for m in self.records
        ]

    def body_lines(self) -> list[str]:
        return [_canonical({"header": self.header})] + self.record_lines()

    def hash(self) -> str:
        digest = hashlib.sha256()
        for line in self.body_lines():
            digest.update(line.encode())
            digest.update(b"\n")
        return digest.hexdigest()

    def write(self, path: Path) -> str:
        self.sort_records()
        lines = self.body_lines()
        content_hash = self.hash()
        lines.append(_canonical({"sha256": content_hash}))
        Path(path).write_text("\n".join(lines) + "\n")
        return content_hash

    def commands(self) -> list[BusMessage]:
        return [m for m in self.records if m.topic.startswith("dm.command.")]

    def by_topic(self, prefix: str) -> list[BusMessage]:
        return [m for m in self.records if m.topic.startswith(prefix)]


def new_trace(scenario_name: str, seed: int, duration_ms: int, config_dict: dict,
              config_hash: str, faults: list[dict] | None = None) -> SessionTrace:
    return SessionTrace(
        header={
            "format": TRACE_FORMAT,
            "version": TRACE_VERSION,
            "scenario": scenario_name,
            "seed": seed,
            "duration_ms": duration_ms,
            "config": config_dict,
            "config_hash": config_hash,
            "faults": faults or [],
            "artifact_version": ARTIFACT_VERSION,
        }
    )


def read_trace(path: Path, verify: bool = True) -> SessionTrace:
    lines = Path(path).read_text().splitlines()
    if len(lines) < 2:
        raise InvalidScenario(f"trace file {path} is truncated")
    try:
        header_obj = json.loads(lines[0])
        footer_obj = json.loads(lines[-1])
        record_objs = [json.loads(line) for line in lines[1:-1]]
    except json.JSONDecodeError as exc:
        raise InvalidScenario(f"trace file {path} is not line-delimited JSON: {exc}") from exc
    if "header" not in header_obj or "sha256" not in footer_obj:
        raise InvalidScenario(f"trace file {path} lacks header or hash footer")
    trace = SessionTrace(header=header_obj["header"])
    for obj in record_objs:
        trace.records.append(
            BusMessage(
                topic=obj["topic"],
                seq=obj["seq"],
                timestamp=obj["t"],
                source=obj["source"],
                payload=payload_from_dict(obj["payload"]),
            )
        )
    if verify:
        expected = footer_obj["sha256"]
        actual = trace.hash()
        if actual != expected:
            raise HashMismatch(
                f"trace {path}: recorded hash {expected[:12]}.. != recomputed {actual[:12]}.."
            )
    return trace


def render_timeline(records: Iterable[BusMessage]) -> list[str]:
    """Human-readable (time, actor, event) lines."""
    lines = []
    for m in records:
        payload = m.payload
        summary = _summarize(payload)
        lines.append(f"{m.timestamp / 1000.0:9.3f}s  {m.source:<16} {m.topic:<22} {summary}")
    return lines


def _summarize(payload: Any) -> str:
    kind = getattr(payload, "kind", "?")
    if kind == "aoi_window":
        fix = " fixated" if payload.fixated else ""
        return f"AOI={payload.label.value}{fix} (valid {payload.valid_fraction:.2f})"
    if kind == "readiness":
        return f"readiness={payload.state.value} slope={payload.slope:+.4f}"
    if kind == "baby_behavior":
        return f"baby {payload.label} [{payload.origin}]"
    if kind == "lifecycle":
        extra = f" ({payload.reason})" if payload.reason else ""
        return f"{payload.agent.value} {payload.phase.value} {payload.behavior}{extra}"
    if kind == "command":
        if payload.action == "reset":
            return f"-> {payload.agent.value} reset to idle"
        target = f" to {payload.target}" if payload.target else ""
        return f"-> {payload.agent.value} {payload.behavior}{target}"
    if kind == "timer":
        return f"timer {payload.timer_kind.value} fired"
    if kind == "session_control":
        if payload.action == "parent":
            return f"parent_joined={payload.parent_joined}"
        return f"session {payload.action}"
    if kind == "state_snapshot":
        s = payload.state
        return (
            f"state aoi={s.get('aoi')} readiness={s.get('readiness')} "
            f"episode={s.get('episode')}"
        )
    return kind
