"""
Gaze perception walkthrough
===========================

Calibrate the AOI geometry, classify single gaze points, and watch the
half-second majority vote turn a raw 120 Hz stream into window events.
"""

import numpy as np

from rave import Aoi, GazeSample, calibrate, classify_point, classify_window
from rave.gaze import DEFAULT_LAYOUT, GazeWindower, AoiGeometry

# The configured layout: avatar screen on the left, robot on the right,
# a narrow in-between strip, everything in normalized [0,1]^2 scene coords.
geometry = AoiGeometry(regions=dict(DEFAULT_LAYOUT))
for label, rect in geometry.regions.items():
    print(f"{label.value:<10} x:[{rect.x0:.2f},{rect.x1:.2f}] y:[{rect.y0:.2f},{rect.y1:.2f}]")

# Calibration: the tracker reads 0.04 right of truth; the affine fit of
# measured onto true landmarks shifts the working geometry accordingly.
landmarks = [(0.2, 0.3), (0.8, 0.3), (0.2, 0.7), (0.8, 0.7)]
pairs = [((x, y), (x + 0.04, y)) for x, y in landmarks]
fitted = calibrate(pairs, layout=dict(DEFAULT_LAYOUT))
print(f"\ncalibration residual: {fitted.residual_rms:.2e}")
print(f"avatar rect after fit: x0={fitted.regions[Aoi.AVATAR].x0:.3f} "
      f"(was {DEFAULT_LAYOUT[Aoi.AVATAR].x0:.3f})")

# Single points classify by containment, with Avatar-first tie priority.
for x, y in [(0.25, 0.5), (0.7, 0.5), (0.5, 0.5), (0.98, 0.98)]:
    print(f"point ({x:.2f},{y:.2f}) -> {classify_point(geometry, GazeSample(0, x, y)).value}")

# A noisy stream that drifts from the robot to the avatar, windowed at 500 ms.
rng = np.random.default_rng(0)
windower = GazeWindower(geometry)
period = 1000.0 / 120.0
print("\nwindow events:")
for i in range(60 * 6):
    t = i * period
    drift = min(1.0, t / 2000.0)  # two-second sweep
    cx = 0.7 * (1 - drift) + 0.25 * drift
    sample = GazeSample(t, cx + rng.normal(0, 0.01), 0.5 + rng.normal(0, 0.01))
    event = windower.push(sample)
    if event:
        print(f"  [{event.window_start:>5}-{event.window_end:>5} ms] "
              f"{event.label.value:<10} fixated={event.fixated} counts={event.counts}")
