"""
Wizard-of-Oz gateway walkthrough
================================

Host a short live session with the WebSocket gateway, connect a headless
observer client, inject a baby behavior the way the browser console would,
and watch the dialogue manager react. (The browser console in frontend/
speaks exactly this protocol.)
"""

import json
import socket
import threading
import time

from websockets.sync.client import connect

from rave import RaveConfig, Scenario, load_catalog
from rave.gateway import GatewayServer
from rave.session import SessionRunner

with socket.socket() as s:
    s.bind(("127.0.0.1", 0))
    port = s.getsockname()[1]

gateway = GatewayServer(port, load_catalog())
gateway.start()

scenario = Scenario(name="operator-demo", seed=1, duration_ms=6000)
runner = SessionRunner(
    config=RaveConfig(), seed=1, duration_ms=6000, scenario=scenario,
    realtime=True, gateway=gateway,
)
session = threading.Thread(target=runner.run)
session.start()

with connect(f"ws://127.0.0.1:{port}") as ws:
    hello = json.loads(ws.recv(timeout=5))
    print(f"hello: schema v{hello['payload']['schema']}, "
          f"{len(hello['payload']['labels'])} behavior buttons in "
          f"{len(hello['payload']['categories'])} categories")

    time.sleep(2.0)  # let familiarization get going
    print("\ninjecting baby behavior: Waving")
    ws.send(json.dumps({"v": 1, "kind": "behavior", "payload": {"label": "Waving"}}))

    deadline = time.monotonic() + 4
    while time.monotonic() < deadline:
        frame = json.loads(ws.recv(timeout=4))
        if frame["kind"] == "ack":
            print(f"ack: {frame['payload']}")
        elif frame["kind"] == "event" and frame["topic"] == "dm.state":
            state = frame["payload"]["payload"]["state"]
            if (state["last_behavior"] or {}).get("label") == "Waving":
                print(f"state caught up at t={state['clock']} ms: "
                      f"last_behavior={state['last_behavior']['label']} "
                      f"[{state['last_behavior']['origin']}], "
                      f"episode={state['episode']}")
                break

session.join()
gateway.stop()

operator_records = [
    m for m in runner.trace.records
    if m.topic == "perception.behavior" and m.payload.origin == "operator"
]
print(f"\ntrace holds {len(operator_records)} operator-origin record(s); "
      "to the dialogue manager they are indistinguishable from scripted ones.")
