"""Gaze perception: AOI geometry, calibration, and half-second majority vote.

A 120 Hz sample stream is cut into gapless 500 ms windows of exactly 60
samples. Each window is classified by majority vote over valid samples,
with a fixation flag from a dispersion test. Tracking loss (valid fraction
below 0.5) maps to Outside.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    DegenerateCalibration,
    InsufficientPoints,
    InvalidSample,
    WrongWindowSize,
)
from .events import Aoi, AoiWindowEvent, GazeSample

SAMPLE_RATE_HZ = 120
WINDOW_MS = 500
WINDOW_SAMPLES = 60

# Ties favor engagement with the linguistic agent.
TIEBREAK_ORDER = (Aoi.AVATAR, Aoi.ROBOT, Aoi.IN_BETWEEN, Aoi.OUTSIDE)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle in normalized scene coordinates; edges inclusive."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if not (0.0 <= self.x0 <= self.x1 <= 1.0 and 0.0 <= self.y0 <= self.y1 <= 1.0):
            raise ValueError(f"rect out of [0,1]^2 or inverted: {self}")

    def contains(self, x: float, y: float) -> bool:
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1

    def overlaps_interior(self, other: "Rect", eps: float = 1e-9) -> bool:
        # Shared edges (within float tolerance) do not count as overlap.
        return (
            self.x0 < other.x1 - eps
            and other.x0 < self.x1 - eps
            and self.y0 < other.y1 - eps
            and other.y0 < self.y1 - eps
        )

    def center(self) -> tuple[float, float]:
        return ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)


DEFAULT_LAYOUT = {
    Aoi.AVATAR: Rect(0.05, 0.25, 0.45, 0.75),
    Aoi.IN_BETWEEN: Rect(0.45, 0.30, 0.55, 0.70),
    Aoi.ROBOT: Rect(0.55, 0.30, 0.90, 0.70),
}


@dataclass(frozen=True)
class AoiGeometry:
    """Region rectangles for Robot/Avatar/InBetween; Outside is the complement."""

    regions: dict[Aoi, Rect]
    residual_rms: float = 0.0
    tiebreak: tuple[Aoi, ...] = TIEBREAK_ORDER

    def __post_init__(self):
        expected = {Aoi.ROBOT, Aoi.AVATAR, Aoi.IN_BETWEEN}
        if set(self.regions) != expected:
            raise ValueError(f"regions must be exactly {expected}")
        labels = list(self.regions)
        for i, a in enumerate(labels):
            for b in labels[i + 1 :]:
                if self.regions[a].overlaps_interior(self.regions[b]):
                    raise ValueError(f"regions {a} and {b} overlap")


@dataclass(frozen=True)
class FixationParams:
    containment: float = 0.75  # fraction of valid samples in the majority region
    dispersion: float = 0.05  # max x-range + max y-range, normalized units


def calibrate(
    points: Sequence[tuple[tuple[float, float], tuple[float, float]]],
    layout: Optional[dict[Aoi, Rect]] = None,
    min_points: int = 4,
) -> AoiGeometry:
    """Fit measured gaze to true landmark positions and map the layout.

    ``points`` holds (true landmark, measured sample) pairs. The
    least-squares affine fit from measured to true coordinates is applied
    to the configured layout rectangles (axis-aligned bounding box of the
    mapped corners), and the residual RMS is recorded on the geometry.
    """
    layout = dict(layout or DEFAULT_LAYOUT)
    if len(points) < min_points:
        raise InsufficientPoints(f"need >= {min_points} calibration pairs, got {len(points)}")
    true_xy = np.array([p[0] for p in points], dtype=float)
    meas_xy = np.array([p[1] for p in points], dtype=float)

    centered = meas_xy - meas_xy.mean(axis=0)
    if np.linalg.matrix_rank(centered, tol=1e-9) < 2:
        raise DegenerateCalibration("calibration landmarks are collinear")

    design = np.hstack([meas_xy, np.ones((len(points), 1))])
    coeffs, *_ = np.linalg.lstsq(design, true_xy, rcond=None)  # (3, 2)
    fitted = design @ coeffs
    residual_rms = float(np.sqrt(np.mean(np.sum((fitted - true_xy) ** 2, axis=1))))

    def apply(x: float, y: float) -> tuple[float, float]:
        out = np.array([x, y, 1.0]) @ coeffs
        return float(out[0]), float(out[1])

    regions = {}
    for label, rect in layout.items():
        corners = [
            apply(rect.x0, rect.y0),
            apply(rect.x1, rect.y0),
            apply(rect.x0, rect.y1),
            apply(rect.x1, rect.y1),
        ]
        xs = [c[0] for c in corners]
        ys = [c[1] for c in corners]
        regions[label] = Rect(
            max(0.0, min(xs)), max(0.0, min(ys)), min(1.0, max(xs)), min(1.0, max(ys))
        )
    return AoiGeometry(regions=regions, residual_rms=residual_rms)


def classify_point(geometry: AoiGeometry, sample: GazeSample) -> Aoi:
    """Label of the region containing the sample; Outside if none.

    Shared boundaries resolve by the geometry's tiebreak priority.
    """
    if not sample.valid:
        raise InvalidSample("cannot classify a sample with no eye detection")
    for label in geometry.tiebreak:
        rect = geometry.regions.get(label)
        if rect is not None and rect.contains(sample.x, sample.y):
            return label
    return Aoi.OUTSIDE


def classify_window(
    geometry: AoiGeometry,
    samples: Sequence[GazeSample],
    fixation: FixationParams = FixationParams(),
    min_valid_fraction: float = 0.5,
) -> AoiWindowEvent:
    """Majority vote over one 60-sample window."""
    if len(samples) != WINDOW_SAMPLES:
        raise WrongWindowSize(f"expected {WINDOW_SAMPLES} samples, got {len(samples)}")
    counts = {label.value: 0 for label in Aoi}
    valid = [s for s in samples if s.valid]
    for s in valid:
        counts[classify_point(geometry, s).value] += 1
    valid_fraction = len(valid) / len(samples)
    window_start = int(samples[0].t)
    window_end = window_start + WINDOW_MS

    if valid_fraction < min_valid_fraction:
        return AoiWindowEvent(window_start, window_end, Aoi.OUTSIDE, False, counts, valid_fraction)

    best = max(counts.values())
    label = next(l for l in geometry.tiebreak if counts[l.value] == best)
    fixated = detect_fixation(geometry, samples, fixation)
    return AoiWindowEvent(window_start, window_end, label, fixated, counts, valid_fraction)


def detect_fixation(
    geometry: AoiGeometry,
    samples: Sequence[GazeSample],
    params: FixationParams = FixationParams(),
) -> bool:
    """Dispersion-threshold fixation test over one window.

    True iff at least ``containment`` of the valid samples fall in the
    majority label's region and the dispersion (x-range + y-range over
    those samples) stays within ``dispersion``.
    """
    valid = [s for s in samples if s.valid]
    if not valid:
        return False
    labels = [classify_point(geometry, s) for s in valid]
    counts = {label: 0 for label in Aoi}
    for l in labels:
        counts[l] += 1
    best = max(counts.values())
    majority = next(l for l in geometry.tiebreak if counts[l] == best)
    in_majority = [s for s, l in zip(valid, labels) if l == majority]
    if len(in_majority) < params.containment * len(valid):
        return False
    xs = [s.x for s in in_majority]
    ys = [s.y for s in in_majority]
    dispersion = (max(xs) - min(xs)) + (max(ys) - min(ys))
    return dispersion <= params.dispersion


class GazeWindower:
    """Cuts a sample stream into consecutive 60-sample windows."""

    def __init__(
        self,
        geometry: AoiGeometry,
        fixation: FixationParams = FixationParams(),
        min_valid_fraction: float = 0.5,
    ):
        self.geometry = geometry
        self.fixation = fixation
        self.min_valid_fraction = min_valid_fraction
        self._buffer: list[GazeSample] = []

    def push(self, sample: GazeSample) -> Optional[AoiWindowEvent]:
        self._buffer.append(sample)
        if len(self._buffer) < WINDOW_SAMPLES:
            return None
        window = self._buffer
        self._buffer = []
        return classify_window(self.geometry, window, self.fixation, self.min_valid_fraction)

    def push_all(self, samples: Iterable[GazeSample]) -> list[AoiWindowEvent]:
        events = []
        for s in samples:
            ev = self.push(s)
            if ev is not None:
                events.append(ev)
        return events
