"""
Thermal readiness walkthrough
=============================

Turn a 50 Hz nose-tip temperature stream into the five-valued
readiness-to-learn signal: slope estimation over a sliding window,
deadband classification, and sustained-run promotion.
"""

import numpy as np

from rave import ThermalSample, estimate_slope, run_thermal_stream
from rave.thermal import ThermalParams

params = ThermalParams()
print(f"window {params.window_s:.0f} s, hop {params.hop_s:.0f} s, "
      f"deadband {params.deadband} degC/s, sustain {params.sustain} windows\n")

# One window of a clean warming ramp: slope recovers the ramp rate.
ramp = [ThermalSample(t=i * 20.0, temp=34.0 + 0.008 * i * 20.0 / 1000.0) for i in range(500)]
print(f"clean ramp slope: {estimate_slope(ramp):.4f} degC/s")

# A full session-shaped stream: flat, then warming (engagement), then a
# sharp cooling (distress), with sensor noise throughout.
rng = np.random.default_rng(1)


def temp_at(t_ms):
    if t_ms < 15000:
        return 34.1
    if t_ms < 40000:
        return 34.1 + 0.012 * (t_ms - 15000) / 1000.0
    return 34.4 - 0.02 * (t_ms - 40000) / 1000.0


samples = [
    ThermalSample(t=i * 20.0, temp=temp_at(i * 20.0) + rng.normal(0, 0.01))
    for i in range(50 * 55)
]
events = run_thermal_stream(samples, params)

print("\nreadiness per second:")
previous = None
for event in events:
    if event.state != previous:
        print(f"  t={event.window_end / 1000.0:>5.1f}s  {event.state.value:<13} "
              f"slope={event.slope:+.4f}")
        previous = event.state
