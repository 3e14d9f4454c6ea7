"""Thermal perception: nose-tip temperature slope to readiness-to-learn.

A 50 Hz temperature stream is analyzed over a sliding window (default 10 s,
1 s hop). The least-squares slope of each window is classified against a
deadband; sustained runs of same-sign supra-deadband slopes promote the
state to its "very" grade. Windows with too few valid samples classify to
None regardless of slope.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InsufficientValidSamples
from .events import Readiness, ReadinessEvent, ThermalSample

SAMPLE_RATE_HZ = 50


@dataclass(frozen=True)
class ThermalParams:
    window_s: float = 10.0
    hop_s: float = 1.0
    deadband: float = 0.003  # degC/s
    sustain: int = 3  # consecutive windows for the "very" grades
    min_valid_fraction: float = 0.8
    sample_rate_hz: float = SAMPLE_RATE_HZ


@dataclass(frozen=True)
class WindowStat:
    """Per-window summary fed to the classifier."""

    slope: float
    valid_fraction: float


def estimate_slope(samples: Sequence[ThermalSample], params: ThermalParams = ThermalParams()) -> float:
    """Least-squares slope in degC/s over the valid samples of one window."""
    valid = [s for s in samples if s.valid]
    required = params.min_valid_fraction * params.window_s * params.sample_rate_hz
    if len(valid) < required:
        raise InsufficientValidSamples(
            f"{len(valid)} valid samples, need >= {required:.0f} over {params.window_s:.0f} s"
        )
    return _regression_slope(valid)


def _regression_slope(valid: Sequence[ThermalSample]) -> float:
    if len(valid) < 2:
        return 0.0
    t = np.array([s.t for s in valid], dtype=float) / 1000.0
    y = np.array([s.temp for s in valid], dtype=float)
    t = t - t.mean()
    denom = float(np.dot(t, t))
    if denom == 0.0:
        return 0.0
    return float(np.dot(t, y - y.mean()) / denom)


def classify_history(history: Sequence[WindowStat], params: ThermalParams = ThermalParams()) -> Readiness:
    """Readiness after the last window, given the recent window stats.

    The trailing run of consecutive windows that are valid and share the
    same supra-deadband slope sign determines the grade: a run of at least
    ``sustain`` windows is the sustained ("very") state.
    """
    if not history:
        return Readiness.NONE
    last = history[-1]
    if last.valid_fraction < params.min_valid_fraction:
        return Readiness.NONE
    sign = _slope_sign(last.slope, params.deadband)
    if sign == 0:
        return Readiness.NONE
    run = 0
    for stat in reversed(history):
        if stat.valid_fraction < params.min_valid_fraction:
            break
        if _slope_sign(stat.slope, params.deadband) != sign:
            break
        run += 1
    if sign > 0:
        return Readiness.VERY_POSITIVE if run >= params.sustain else Readiness.POSITIVE
    return Readiness.VERY_NEGATIVE if run >= params.sustain else Readiness.NEGATIVE


def _slope_sign(slope: float, deadband: float) -> int:
    if slope > deadband:
        return 1
    if slope < -deadband:
        return -1
    return 0


def classify_readiness(
    history: Sequence[WindowStat],
    window_end_ms: int,
    params: ThermalParams = ThermalParams(),
) -> ReadinessEvent:
    state = classify_history(history, params)
    last = history[-1] if history else WindowStat(0.0, 0.0)
    return ReadinessEvent(
        window_end=window_end_ms,
        state=state,
        slope=last.slope,
        valid_fraction=last.valid_fraction,
    )


def run_thermal_stream(
    samples: Iterable[ThermalSample], params: ThermalParams = ThermalParams()
) -> list[ReadinessEvent]:
    """Classify a whole sample stream, one event per hop interval."""
    classifier = ThermalClassifier(params)
    events = classifier.push_all(samples)
    return events


class ThermalClassifier:
    """Sliding-window stream processor emitting one event per hop.

    Warm-up windows are handled by the validity rule: before a full window
    of data exists the valid fraction (relative to a full window) cannot
    reach the threshold, so early events classify to None.
    """

    def __init__(self, params: ThermalParams = ThermalParams()):
        self.params = params
        self._buffer: deque[ThermalSample] = deque()
        self._history: list[WindowStat] = []
        self._next_hop_ms: float = params.hop_s * 1000.0

    def push(self, sample: ThermalSample) -> list[ReadinessEvent]:
        events = []
        while sample.t >= self._next_hop_ms:
            events.append(self._emit(int(self._next_hop_ms)))
            self._next_hop_ms += self.params.hop_s * 1000.0
        self._buffer.append(sample)
        return events

    def flush(self, up_to_ms: int) -> list[ReadinessEvent]:
        events = []
        while self._next_hop_ms <= up_to_ms:
            events.append(self._emit(int(self._next_hop_ms)))
            self._next_hop_ms += self.params.hop_s * 1000.0
        return events

    def push_all(self, samples: Iterable[ThermalSample]) -> list[ReadinessEvent]:
        events = []
        for s in samples:
            events.extend(self.push(s))
        return events

    def _emit(self, window_end_ms: int) -> ReadinessEvent:
        window_start = window_end_ms - self.params.window_s * 1000.0
        while self._buffer and self._buffer[0].t < window_start:
            self._buffer.popleft()
        window = [s for s in self._buffer if s.t < window_end_ms]
        expected = self.params.window_s * self.params.sample_rate_hz
        valid = [s for s in window if s.valid]
        valid_fraction = min(1.0, len(valid) / expected) if expected else 0.0
        slope = _regression_slope(valid)
        self._history.append(WindowStat(slope, valid_fraction))
        if len(self._history) > 64:
            self._history = self._history[-64:]
        return classify_readiness(self._history, window_end_ms, self.params)
