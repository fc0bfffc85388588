import pytest

from src.qppnest.config import (
    DEFAULT_READ_TIMEOUT,
    Settings,
    env_flag,
    insecure_demo_acknowledged,
    resolve_pad_params,
)
from src.qppnest.errors import ParameterError


def test_defaults(clean_env):
    settings = Settings.from_env()
    assert (settings.n, settings.m) == (8, 64)
    assert not settings.insecure_demo
    assert not settings.record_mac
    assert settings.read_timeout == DEFAULT_READ_TIMEOUT


def test_default_gate_count_follows_n(clean_env):
    assert resolve_pad_params(4) == (4, 8)
    assert resolve_pad_params(8) == (8, 64)


def test_environment_overrides_defaults(clean_env):
    clean_env.setenv("QPP_N", "4")
    clean_env.setenv("QPP_M", "16")
    clean_env.setenv("QPP_READ_TIMEOUT", "2.5")
    clean_env.setenv("QPP_RECORD_MAC", "yes")
    clean_env.setenv("QPP_CONNECT_RETRIES", "2")
    settings = Settings.from_env()
    assert (settings.n, settings.m) == (4, 16)
    assert settings.read_timeout == 2.5
    assert settings.record_mac
    assert settings.connect_retries == 2


def test_flags_beat_environment(clean_env):
    clean_env.setenv("QPP_N", "4")
    clean_env.setenv("QPP_M", "16")
    clean_env.setenv("QPP_RECORD_MAC", "1")
    settings = Settings.from_env(n=8, m=256, record_mac=False, read_timeout=1.0)
    assert (settings.n, settings.m) == (8, 256)
    assert not settings.record_mac
    assert settings.read_timeout == 1.0


def test_demo_acknowledgement(clean_env):
    assert not insecure_demo_acknowledged()
    assert insecure_demo_acknowledged(True)
    clean_env.setenv("QPP_DEMO_ACK", "1")
    assert insecure_demo_acknowledged()
    assert Settings.from_env().insecure_demo


@pytest.mark.parametrize("value,expected", [("1", True), ("TRUE", True), (" on ", True), ("0", False), ("", False), ("nope", False)])
def test_env_flag(clean_env, value, expected):
    clean_env.setenv("QPP_RECORD_MAC", value)
    assert env_flag("QPP_RECORD_MAC") is expected


def test_malformed_numbers(clean_env):
    clean_env.setenv("QPP_N", "eight")
    with pytest.raises(ParameterError):
        Settings.from_env()
    clean_env.setenv("QPP_N", "8")
    clean_env.setenv("QPP_READ_TIMEOUT", "soon")
    with pytest.raises(ParameterError):
        Settings.from_env()
