"""
Determinism and replay walkthrough
==================================

Two runs of the same scenario hash identically; replay re-feeds a trace's
perceptual records through a fresh dialogue manager and checks that the
regenerated commands match; a tampered record is pinpointed by index.
"""

import dataclasses
from pathlib import Path

from rave import load_scenario, replay, run_session

scenario = load_scenario(
    Path(__file__).resolve().parent.parent / "scenarios" / "social_referencing.yaml"
)

first = run_session(scenario)
second = run_session(scenario)
print(f"run 1 hash: {first.trace.hash()[:24]}..")
print(f"run 2 hash: {second.trace.hash()[:24]}..")
print(f"bit-exact: {first.trace.hash() == second.trace.hash()}")

report = replay(first.trace)
print(f"\nreplay: ok={report.ok}, "
      f"{report.regenerated_commands}/{report.recorded_commands} commands regenerated")

# Now corrupt one command record (and recompute the footer hash so the
# file itself is coherent); replay localizes the divergence.
tampered = first.trace
idx = [i for i, m in enumerate(tampered.records) if m.topic.startswith("dm.command.")][3]
victim = tampered.records[idx]
tampered.records[idx] = dataclasses.replace(
    victim, payload=dataclasses.replace(victim.payload, behavior="HeadShake")
)
report = replay(tampered)
print(f"\nafter tampering with record {idx} ({victim.payload.behavior} -> HeadShake):")
print(f"  ok={report.ok}, divergence at command index {report.first_divergence}")
print(f"  {report.detail[:110]}")
