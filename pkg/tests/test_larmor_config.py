import pytest

from larmor_config import LarmorSettings, get_settings, reset_settings
from larmor_errors import (
    ConfigurationError,
    ConvergenceError,
    DegenerateMomentsError,
    DomainError,
    NumericalInstabilityError,
    ParseError,
    SingularityError,
)


def test_defaults():
    settings = get_settings()
    assert settings == LarmorSettings()
    assert settings.feebleness_ratio == 1e-4
    assert settings.richardson_levels == 3
    assert get_settings() is settings


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("LARMOR_GRID_SEGMENTS", "4000")
    monkeypatch.setenv("LARMOR_LOG_LEVEL", "debug")
    monkeypatch.setenv("LARMOR_WORKERS", " 4 ")
    reset_settings()
    settings = get_settings()
    assert settings.grid_segments == 4000
    assert settings.log_level == "DEBUG"
    assert settings.workers == 4


@pytest.mark.parametrize("name, value", [
    ("LARMOR_GRID_SEGMENTS", "ten"),
    ("LARMOR_GRID_SEGMENTS", "8"),
    ("LARMOR_FEEBLENESS", "0.5"),
    ("LARMOR_LOG_LEVEL", "LOUD"),
    ("LARMOR_MC_SAMPLES", "10"),
])
def test_invalid_environment(monkeypatch, name, value):
    monkeypatch.setenv(name, value)
    reset_settings()
    with pytest.raises(ConfigurationError):
        get_settings()


def test_exit_codes():
    assert DomainError("x").exit_code == 2
    assert SingularityError("x").exit_code == 2
    assert ConfigurationError("x").exit_code == 2
    assert ParseError("x").exit_code == 3
    assert NumericalInstabilityError("x").exit_code == 4
    assert ConvergenceError("x").exit_code == 4
    assert isinstance(DegenerateMomentsError("x"), ValueError)


def test_error_context_in_messages():
    assert str(ParseError("bad cell", line=7)) == "line 7: bad cell"
    error = NumericalInstabilityError("overflow", segment=12)
    assert error.segment == 12 and str(error).startswith("segment 12:")
    assert ConvergenceError("stuck", (1.0, 2.0)).sequence == [1.0, 2.0]
