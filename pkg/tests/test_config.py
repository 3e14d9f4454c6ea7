from __future__ import annotations

import textwrap

import pytest

from rave.config import RaveConfig, load_config
from rave.errors import ConfigInvalid
from rave.events import Aoi


def test_default_config_builds_valid_components():
    config = RaveConfig()
    geometry = config.aoi.geometry()
    assert set(geometry.regions) == {Aoi.ROBOT, Aoi.AVATAR, Aoi.IN_BETWEEN}
    assert config.thermal.params().deadband == 0.003
    assert config.timers.params().idle_timeout_ms == 8000


def test_yaml_file_overrides_defaults(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(
        textwrap.dedent(
            """
            timers: {idle_timeout_ms: 5000}
            thermal: {deadband: 0.004}
            """
        )
    )
    config = load_config(path, env={})
    assert config.timers.idle_timeout_ms == 5000
    assert config.thermal.deadband == 0.004
    assert config.timers.episode_timeout_ms == 30000  # untouched default


def test_env_overrides_win(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("timers: {idle_timeout_ms: 5000}\n")
    config = load_config(path, env={"RAVE_TIMERS_IDLE_TIMEOUT_MS": "6500"})
    assert config.timers.idle_timeout_ms == 6500


def test_env_overrides_reach_nested_floats():
    config = load_config(env={"RAVE_THERMAL_DEADBAND": "0.01"})
    assert config.thermal.deadband == 0.01


def test_unknown_section_rejected(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("sprockets: {count: 2}\n")
    with pytest.raises(ConfigInvalid):
        load_config(path, env={})


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("timers: {idle_timeout_msx: 5}\n")
    with pytest.raises(ConfigInvalid):
        load_config(path, env={})


def test_missing_file_rejected(tmp_path):
    with pytest.raises(ConfigInvalid):
        load_config(tmp_path / "nope.yaml", env={})


def test_hash_is_stable_and_sensitive():
    a = RaveConfig()
    b = RaveConfig()
    assert a.hash() == b.hash()
    c = load_config(env={"RAVE_TIMERS_IDLE_TIMEOUT_MS": "1"})
    assert c.hash() != a.hash()
