import pytest

from dske.config import DEFAULT_PORT, DSKEConfig
from dske.errors import ParameterError


def test_defaults(monkeypatch):
    for name in ("DSKE_P", "DSKE_Q", "DSKE_N", "DSKE_ADDR", "DSKE_PORT", "DSKE_TIMEOUT",
                 "DSKE_KEY_LEN", "DSKE_SEARCH_CAP", "DSKE_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    settings = DSKEConfig()
    assert settings.addr == "127.0.0.1"
    assert settings.port == DEFAULT_PORT == 4529
    assert settings.key_len == 8
    assert settings.timeout == 10.0
    assert settings.search_cap == 10_000_000
    assert settings.log_level == "WARNING"
    assert (settings.p, settings.q, settings.n) == (None, None, None)


def test_environment_values(monkeypatch):
    monkeypatch.setenv("DSKE_P", "5")
    monkeypatch.setenv("DSKE_Q", "0x1d")
    monkeypatch.setenv("DSKE_N", "3")
    monkeypatch.setenv("DSKE_LOG_LEVEL", "debug")
    settings = DSKEConfig()
    assert (settings.p, settings.q, settings.n) == (5, 29, 3)
    assert settings.log_level == "DEBUG"


@pytest.mark.parametrize("name, value", [("DSKE_KEY_LEN", "eight"), ("DSKE_TIMEOUT", "soon")])
def test_malformed_values(monkeypatch, name, value):
    monkeypatch.setenv(name, value)
    with pytest.raises(ParameterError):
        DSKEConfig()
