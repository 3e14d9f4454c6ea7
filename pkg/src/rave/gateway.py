"""WebSocket gateway bridging the bus to external observer clients.

Outbound, every dm.state and agent.* message becomes one JSON text frame;
inbound, validated operator frames inject baby-behavior events (origin
"operator") and session controls. The frame schema is versioned by a hello
frame sent on connect, which also carries the behavior catalog so clients
can build their button grid without hardcoding labels.

Frame shape: {"v": 1, "kind": ..., "topic"?: ..., "payload": ...}
Kinds: hello, event (outbound); behavior, session (inbound); ack, error
(outbound responses to inbound frames).
"""

from __future__ import annotations

import functools
import http.server
import json
import logging
import queue
import threading
from pathlib import Path
from typing import Any, Optional

from websockets.sync.server import Server, ServerConnection, serve

from .behaviors import BehaviorCatalog
from .bus import BusMessage
from .errors import UnknownLabel
from .events import payload_to_dict

logger = logging.getLogger(__name__)

PROTOCOL_VERSION = 1
# dm.state and agent lifecycle stream to observers; perception.behavior is
# included so consoles can log the echo of their own injections.
OUTBOUND_PREFIXES = ("dm.state", "agent.", "perception.behavior")


def _frame(kind: str, payload: Any, topic: Optional[str] = None) -> str:
    frame: dict[str, Any] = {"v": PROTOCOL_VERSION, "kind": kind, "payload": payload}
    if topic is not None:
        frame["topic"] = topic
    return json.dumps(frame, sort_keys=True)


class GatewayServer:
    """One session, many observer clients; writes funnel through the bus."""

    def __init__(self, port: int, catalog: BehaviorCatalog, host: str = "127.0.0.1"):
        self.port = port
        self.host = host
        self.catalog = catalog
        self.scenario_name = ""
        self._injections: "queue.Queue[dict]" = queue.Queue()
        self._clients: set[ServerConnection] = set()
        self._clients_lock = threading.Lock()
        self._server: Optional[Server] = None
        self._thread: Optional[threading.Thread] = None

    # --- lifecycle -----------------------------------------------------------

    def start(self) -> None:
        self._server = serve(self._handler, self.host, self.port)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        logger.info("gateway listening on ws://%s:%d", self.host, self.port)

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
        if self._thread is not None:
            self._thread.join(timeout=2.0)

    def attach(self, runner) -> None:
        """Called by the session runner; streams selected topics outward."""
        self.scenario_name = runner.trace.header.get("scenario", "")
        runner.bus.add_tap(self._outbound_tap)

    # --- outbound -------------------------------------------------------------

    def _outbound_tap(self, msg: BusMessage) -> None:
        if not msg.topic.startswith(OUTBOUND_PREFIXES):
            return
        record = {
            "t": msg.timestamp,
            "seq": msg.seq,
            "source": msg.source,
            "payload": payload_to_dict(msg.payload),
        }
        text = _frame("event", record, topic=msg.topic)
        with self._clients_lock:
            clients = list(self._clients)
        for client in clients:
            try:
                client.send(text)
            except Exception:
                with self._clients_lock:
                    self._clients.discard(client)

    # --- inbound --------------------------------------------------------------

    def _handler(self, ws: ServerConnection) -> None:
        hello = {
            "schema": PROTOCOL_VERSION,
            "scenario": self.scenario_name,
            "labels": self.catalog.labels,
            "categories": self.catalog.by_category(),
        }
        ws.send(_frame("hello", hello))
        with self._clients_lock:
            self._clients.add(ws)
        try:
            for raw in ws:
                response = self._handle_frame(raw)
                if response is not None:
                    ws.send(response)
        except Exception:
            pass
        finally:
            with self._clients_lock:
                self._clients.discard(ws)

    def _handle_frame(self, raw: str | bytes) -> Optional[str]:
        try:
            frame = json.loads(raw)
        except (json.JSONDecodeError, TypeError):
            return _frame("error", {"code": "MalformedFrame", "message": "frame is not JSON"})
        if not isinstance(frame, dict) or "kind" not in frame:
            return _frame("error", {"code": "MalformedFrame", "message": "frame needs a kind"})
        kind = frame.get("kind")
        payload = frame.get("payload") or {}
        if kind == "behavior":
            label = payload.get("label")
            try:
                self.catalog.entry(label)
            except UnknownLabel as exc:
                return _frame("error", {"code": exc.code, "message": str(exc)})
            self._injections.put({"kind": "behavior", "label": label})
            return _frame("ack", {"label": label})
        if kind == "session":
            if "parent_joined" in payload:
                self._injections.put(
                    {"kind": "session", "parent_joined": bool(payload["parent_joined"])}
                )
                return _frame("ack", {"parent_joined": bool(payload["parent_joined"])})
            return _frame(
                "error", {"code": "MalformedFrame", "message": "session frame needs parent_joined"}
            )
        return _frame("error", {"code": "MalformedFrame", "message": f"unknown kind {kind!r}"})

    def drain_injections(self) -> list[dict]:
        out = []
        while True:
            try:
                out.append(self._injections.get_nowait())
            except queue.Empty:
                return out


def serve_static(directory: Path, port: int, host: str = "127.0.0.1") -> http.server.ThreadingHTTPServer:
    """Serve the observer console's static assets in a background thread."""
    handler = functools.partial(
        http.server.SimpleHTTPRequestHandler, directory=str(directory)
    )
    handler_cls = handler
    server = http.server.ThreadingHTTPServer((host, port), handler_cls)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    logger.info("serving console UI from %s on http://%s:%d", directory, host, port)
    return server
