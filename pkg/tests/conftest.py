from __future__ import annotations

import numpy as np
import pytest

from rave.behaviors import load_catalog
from rave.bus import EventBus
from rave.clock import SessionClock
from rave.config import RaveConfig
from rave.events import Aoi, GazeSample
from rave.gaze import DEFAULT_LAYOUT, AoiGeometry
from rave.policy import load_policy
from rave.scenario import GazeSegment, Scenario, ThermalSegment, TimelineBehavior


@pytest.fixture(scope="session")
def catalog():
    return load_catalog()


@pytest.fixture(scope="session")
def policy():
    return load_policy()


@pytest.fixture
def geometry():
    return AoiGeometry(regions=dict(DEFAULT_LAYOUT))


@pytest.fixture
def config():
    return RaveConfig()


@pytest.fixture
def started_bus():
    clock = SessionClock()
    clock.start(0)
    return EventBus(clock), clock


def window_at(geometry, spec, t0=0, period=1000.0 / 120.0):
    """Build a 60-sample window from (label_or_None, count) pairs.

    None produces invalid samples; labels place samples at region centers
    (Outside at a far corner).
    """
    samples = []
    i = 0
    for label, count in spec:
        for _ in range(count):
            t = t0 + i * period
            i += 1
            if label is None:
                samples.append(GazeSample(t=t, x=0.0, y=0.0, valid=False))
                continue
            if label == Aoi.OUTSIDE:
                x, y = 0.99, 0.02
            else:
                x, y = geometry.regions[label].center()
            samples.append(GazeSample(t=t, x=x, y=y, valid=True))
    assert i == 60, "window specs must total 60 samples"
    return samples


def quiet_scenario(name="quiet", seed=1, duration_ms=30000, **kwargs):
    return Scenario(name=name, seed=seed, duration_ms=duration_ms, **kwargs)


def cooperative_scenario(seed=11, duration_ms=60000):
    return Scenario(
        name="coop",
        seed=seed,
        duration_ms=duration_ms,
        gaze=(GazeSegment(0, 12000, "InBetween"), GazeSegment(12000, duration_ms, "Avatar")),
        thermal=(
            ThermalSegment(0, 14000, 34.0, 34.0, 0.005),
            ThermalSegment(14000, 44000, 34.0, 34.45, 0.005),
            ThermalSegment(44000, duration_ms, 34.45, 34.45, 0.005),
        ),
        behaviors=(TimelineBehavior(20000, "Attention"),),
    )


def random_scenario(rng: np.random.Generator, catalog, duration_ms=15000, index=0):
    """A randomized short scenario for property sweeps; no faults."""
    labels = catalog.labels
    targets = ["Avatar", "Robot", "InBetween", "Outside", "off"]
    gaze = []
    t = 0
    while t < duration_ms:
        span = int(rng.integers(2000, 6000))
        gaze.append(GazeSegment(t, min(t + span, duration_ms), targets[int(rng.integers(5))]))
        t += span
    thermal = []
    t = 0
    level = 34.0
    while t < duration_ms:
        span = int(rng.integers(3000, 8000))
        end_level = float(np.clip(level + rng.uniform(-0.3, 0.3), 33.5, 34.8))
        thermal.append(
            ThermalSegment(t, min(t + span, duration_ms), level, end_level, 0.005)
        )
        level = end_level
        t += span
    n_behaviors = int(rng.integers(0, 5))
    times = sorted(int(rng.integers(500, duration_ms - 500)) for _ in range(n_behaviors))
    behaviors = tuple(
        TimelineBehavior(at, labels[int(rng.integers(len(labels)))]) for at in times
    )
    return Scenario(
        name=f"random-{index}",
        seed=int(rng.integers(0, 2**31)),
        duration_ms=duration_ms,
        gaze=tuple(gaze),
        thermal=tuple(thermal),
        behaviors=behaviors,
    )
