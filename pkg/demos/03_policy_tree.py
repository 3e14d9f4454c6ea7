"""
Policy walkthrough
==================

The rule table maps every (attention target, readiness class, behavior)
combination to a plan template, first match wins. This script checks the
table is total over all 480 combinations and then asks it what to do in a
few telling situations.
"""

import numpy as np

from rave import Aoi, Readiness, check_policy_coverage, load_catalog, load_policy
from rave.agents import load_agent_catalog
from rave.plans import PlanLibrary
from rave.policy import GuardInput

policy = load_policy()
catalog = load_catalog()

report = check_policy_coverage(policy, catalog)
print(f"coverage: {report.covered}/{report.total} "
      f"({report.baseline} baseline combinations with a concrete behavior)")
print("\nbusiest rules:")
for rule_id, count in sorted(report.rule_counts().items(), key=lambda kv: -kv[1])[:6]:
    print(f"  {rule_id:<32} {count:>4} combinations")

library = PlanLibrary(load_agent_catalog(), rng=np.random.default_rng(7))

situations = [
    ("attending in-between, engaged readiness", Aoi.IN_BETWEEN, Readiness.POSITIVE, None),
    ("crying while watching the avatar", Aoi.AVATAR, Readiness.NEGATIVE, "Crying"),
    ("pointing at the robot", Aoi.ROBOT, Readiness.NONE, "Pointing"),
    ("looking away, distressed", Aoi.OUTSIDE, Readiness.VERY_NEGATIVE, None),
    ("looking away, no signal", Aoi.OUTSIDE, Readiness.NONE, None),
]

print("\nwhat the policy does:")
for description, aoi, readiness, label in situations:
    guard = GuardInput(
        aoi=aoi,
        readiness=readiness,
        behavior_label=label,
        behavior_class=catalog.policy_class(label) if label else None,
    )
    rule = policy.first_match(guard)
    print(f"\n  {description}")
    print(f"    rule: {rule.id} -> {rule.plan}")
    if rule.plan not in ("wait",):
        rhyme = "Boat" if "rhyme" in rule.plan else ""
        plan = library.build(rule.plan, provenance=rule.id, rhyme=rhyme)
        steps = " -> ".join(f"{s.agent.value}:{s.behavior}" for s in plan.steps)
        print(f"    steps: {steps}")
    else:
        print("    steps: (none; wait for timers or fresh evidence)")
