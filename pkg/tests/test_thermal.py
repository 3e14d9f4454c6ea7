from __future__ import annotations

import itertools

import numpy as np
import pytest

from rave.errors import InsufficientValidSamples
from rave.events import Readiness, ThermalSample
from rave.thermal import (
    ThermalClassifier,
    ThermalParams,
    WindowStat,
    classify_history,
    estimate_slope,
    run_thermal_stream,
)

P = ThermalParams()


def make_window(fn, duration_s=10.0, rate=50, valid_mask=None):
    n = int(duration_s * rate)
    return [
        ThermalSample(
            t=i * 1000.0 / rate,
            temp=fn(i * 1000.0 / rate),
            valid=True if valid_mask is None else valid_mask(i),
        )
        for i in range(n)
    ]


def oracle_state(signs: list[int], sustain: int = P.sustain) -> Readiness:
    """Brute-force evaluation of the promotion rules over a sign sequence.

    Scans the full sequence forward, recomputing the trailing same-sign run
    from scratch at each step; the last step's run decides the grade.
    """
    if not signs or signs[-1] == 0:
        return Readiness.NONE
    run = 0
    for i, s in enumerate(signs):
        run = 0
        for j in range(i, -1, -1):
            if signs[j] != signs[i]:
                break
            run += 1
    sign = signs[-1]
    if sign > 0:
        return Readiness.VERY_POSITIVE if run >= sustain else Readiness.POSITIVE
    return Readiness.VERY_NEGATIVE if run >= sustain else Readiness.NEGATIVE


def stats_from_signs(signs, magnitude=0.01):
    return [WindowStat(slope=s * magnitude, valid_fraction=1.0) for s in signs]


# --- slope estimation -----------------------------------------------------------


def test_constant_temperature_has_zero_slope():
    window = make_window(lambda t: 34.0)
    assert estimate_slope(window) == pytest.approx(0.0, abs=1e-12)


def test_linear_ramp_slope_is_exact():
    # 34.0 -> 34.1 degC over 10 s: slope 0.01 degC/s.
    window = make_window(lambda t: 34.0 + 0.01 * t / 1000.0)
    assert estimate_slope(window) == pytest.approx(0.01, abs=1e-9)


def test_noisy_ramp_slope_matches_regression_oracle():
    rng = np.random.default_rng(42)
    noise = rng.normal(0.0, 0.02, size=500)
    window = [
        ThermalSample(t=i * 20.0, temp=34.0 + 0.01 * (i * 20.0) / 1000.0 + noise[i])
        for i in range(500)
    ]
    got = estimate_slope(window)
    # Independent closed-form oracle on the same generated samples.
    ts = np.array([s.t / 1000.0 for s in window])
    ys = np.array([s.temp for s in window])
    oracle = float(np.polyfit(ts, ys, 1)[0])
    assert got == pytest.approx(oracle, abs=1e-12)
    assert abs(got - 0.01) <= 0.002


def test_insufficient_valid_samples_rejected():
    window = make_window(lambda t: 34.0, valid_mask=lambda i: i % 2 == 0)  # 50% valid
    with pytest.raises(InsufficientValidSamples):
        estimate_slope(window)


# --- readiness classification ------------------------------------------------------


def test_single_supra_deadband_window_is_positive():
    assert classify_history(stats_from_signs([1])) == Readiness.POSITIVE


def test_sustained_run_promotes_to_very_positive():
    assert classify_history(stats_from_signs([1, 1, 1])) == Readiness.VERY_POSITIVE


def test_deadband_window_breaks_the_sustain_chain():
    # Hand trace: (-0.01, -0.01, +0.001, -0.01) -> trailing run of one
    # negative window -> Negative. Cross-checked by the exhaustive oracle.
    stats = [
        WindowStat(-0.01, 1.0),
        WindowStat(-0.01, 1.0),
        WindowStat(0.001, 1.0),
        WindowStat(-0.01, 1.0),
    ]
    assert classify_history(stats) == Readiness.NEGATIVE
    assert oracle_state([-1, -1, 0, -1]) == Readiness.NEGATIVE


def test_exhaustive_sign_sequences_match_oracle():
    for length in range(1, 7):
        for signs in itertools.product((-1, 0, 1), repeat=length):
            got = classify_history(stats_from_signs(list(signs)))
            assert got == oracle_state(list(signs)), f"diverged on {signs}"


def test_low_validity_window_classifies_none_regardless_of_slope():
    stats = [WindowStat(0.02, 1.0), WindowStat(0.02, 0.5)]
    assert classify_history(stats) == Readiness.NONE


def test_monotone_promotion_property():
    # Holding slope above deadband: Positive^(S-1) then VeryPositive forever.
    history = []
    states = []
    for _ in range(8):
        history.append(WindowStat(0.01, 1.0))
        states.append(classify_history(history))
    expected = [Readiness.POSITIVE] * (P.sustain - 1) + [Readiness.VERY_POSITIVE] * (
        8 - P.sustain + 1
    )
    assert states == expected


def test_sign_consistency_on_random_streams():
    rng = np.random.default_rng(7)
    for _ in range(2000):
        n = int(rng.integers(1, 9))
        stats = [
            WindowStat(float(rng.uniform(-0.02, 0.02)), float(rng.choice([1.0, 0.7])))
            for _ in range(n)
        ]
        state = classify_history(stats)
        if state in (Readiness.POSITIVE, Readiness.VERY_POSITIVE):
            assert stats[-1].slope > P.deadband
        if state in (Readiness.NEGATIVE, Readiness.VERY_NEGATIVE):
            assert stats[-1].slope < -P.deadband
        if stats[-1].valid_fraction < P.min_valid_fraction:
            assert state == Readiness.NONE


def test_vertical_shift_leaves_classification_unchanged():
    rng = np.random.default_rng(11)
    base = [
        ThermalSample(t=i * 20.0, temp=34.0 + 0.0004 * i + float(rng.normal(0, 0.01)))
        for i in range(1500)
    ]
    shifted = [ThermalSample(t=s.t, temp=s.temp + 1.5, valid=s.valid) for s in base]
    states_a = [e.state for e in run_thermal_stream(base)]
    states_b = [e.state for e in run_thermal_stream(shifted)]
    assert states_a == states_b


# --- streaming -------------------------------------------------------------------


def test_warming_ramp_stream_ends_very_positive():
    # 30 s monotone warming ramp, verified against the regression oracle on
    # the final window before asserting the stream's last state.
    samples = [ThermalSample(t=i * 20.0, temp=34.0 + 0.01 * (i * 20.0) / 1000.0) for i in range(1500)]
    final_window = [s for s in samples if 20000 <= s.t < 30000]
    ts = np.array([s.t / 1000.0 for s in final_window])
    ys = np.array([s.temp for s in final_window])
    assert float(np.polyfit(ts, ys, 1)[0]) > P.deadband
    events = run_thermal_stream(samples)
    assert events[-1].state == Readiness.VERY_POSITIVE


def test_first_event_during_warmup_is_none():
    samples = [ThermalSample(t=i * 20.0, temp=34.2) for i in range(1500)]
    events = run_thermal_stream(samples)
    assert events[0].window_end == 1000
    assert events[0].state == Readiness.NONE


def test_half_invalid_stream_is_all_none():
    samples = [
        ThermalSample(t=i * 20.0, temp=34.0 + 0.001 * i, valid=i % 2 == 0)
        for i in range(1500)
    ]
    events = run_thermal_stream(samples)
    assert events, "stream should emit warm-up events"
    assert all(e.state == Readiness.NONE for e in events)


def test_stream_emits_one_event_per_hop():
    samples = [ThermalSample(t=i * 20.0, temp=34.0) for i in range(1000)]  # 20 s
    classifier = ThermalClassifier()
    events = classifier.push_all(samples)
    events += classifier.flush(20000)
    assert [e.window_end for e in events] == [1000 * k for k in range(1, 21)]
