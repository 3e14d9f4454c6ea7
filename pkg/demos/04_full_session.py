"""
Full session walkthrough
========================

Run the shipped cooperative scenario end to end in fast mode: the
familiarization episode opens, perception streams update the information
state, the policy steers into nursery rhymes, and the whole session lands
in a deterministic trace.
"""

from pathlib import Path

from rave import load_scenario, run_session
from rave.trace import render_timeline

scenario_path = Path(__file__).resolve().parent.parent / "scenarios" / "cooperative.yaml"
scenario = load_scenario(scenario_path)
print(f"scenario: {scenario.name}, seed {scenario.seed}, "
      f"{scenario.duration_ms / 1000:.0f} s, {len(scenario.reactions)} reaction rules")

result = run_session(scenario)

print(f"\ntrace: {len(result.trace.records)} records, sha256 {result.trace.hash()[:16]}..")
print("episodes:", dict(sorted(result.episode_counts.items())))
print("interrupts handled:", result.interrupts_handled)

print("\nthe familiarization opening (commands only):")
for m in result.trace.commands()[:9]:
    print(f"  {m.timestamp / 1000.0:>6.2f}s  {m.payload.agent.value:<7} {m.payload.behavior}")

print("\nfirst nursery rhyme:")
rhyme_install = next(e for e in result.audit
                     if e["cause"] == "install" and e["episode"] == "NurseryRhyme")
print(f"  installed at {rhyme_install['t'] / 1000.0:.2f}s "
      f"(rule {rhyme_install['provenance']}, rhyme {rhyme_install['rhyme']})")

window = [m for m in result.trace.records
          if rhyme_install["t"] <= m.timestamp <= rhyme_install["t"] + 9000
          and m.topic.startswith(("dm.command.", "perception.behavior"))]
for line in render_timeline(window):
    print(" ", line)
