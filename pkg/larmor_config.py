"""
Runtime configuration read from environment variables.
"""

import logging
import os
from dataclasses import dataclass
from typing import Callable, Optional, TypeVar

from larmor_errors import ConfigurationError

T = TypeVar("T")

logger = logging.getLogger(__name__)


def _env(name: str, default: T, cast: Callable[[str], T]) -> T:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return cast(raw.strip())
    except ValueError:
        raise ConfigurationError(f"Environment variable {name}={raw!r} is not a valid {cast.__name__}")


@dataclass(frozen=True)
class LarmorSettings:
    """Process-wide defaults for the numerical engines and the CLI."""

    log_level: str = "INFO"
    grid_segments: int = 2000
    support_multiplier: float = 5.0
    feebleness_ratio: float = 1e-4
    richardson_levels: int = 3
    workers: int = 1
    mc_samples: int = 1_000_000
    data_dir: str = "data"

    @classmethod
    def from_env(cls) -> "LarmorSettings":
        """Build settings from LARMOR_* environment variables."""
        settings = cls(
            log_level=_env("LARMOR_LOG_LEVEL", cls.log_level, str).upper(),
            grid_segments=_env("LARMOR_GRID_SEGMENTS", cls.grid_segments, int),
            support_multiplier=_env("LARMOR_SUPPORT_MULTIPLIER", cls.support_multiplier, float),
            feebleness_ratio=_env("LARMOR_FEEBLENESS", cls.feebleness_ratio, float),
            richardson_levels=_env("LARMOR_RICHARDSON_LEVELS", cls.richardson_levels, int),
            workers=_env("LARMOR_WORKERS", cls.workers, int),
            mc_samples=_env("LARMOR_MC_SAMPLES", cls.mc_samples, int),
            data_dir=_env("LARMOR_DATA_DIR", cls.data_dir, str),
        )
        settings.validate()
        return settings

    def validate(self):
        if self.log_level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ConfigurationError(f"Unknown log level {self.log_level!r}")
        if self.grid_segments < 16:
            raise ConfigurationError("LARMOR_GRID_SEGMENTS must be at least 16")
        if self.support_multiplier <= 0:
            raise ConfigurationError("LARMOR_SUPPORT_MULTIPLIER must be positive")
        if not 0 < self.feebleness_ratio < 1e-2:
            raise ConfigurationError("LARMOR_FEEBLENESS must lie in (0, 1e-2)")
        if self.richardson_levels < 1:
            raise ConfigurationError("LARMOR_RICHARDSON_LEVELS must be at least 1")
        if self.workers < 1:
            raise ConfigurationError("LARMOR_WORKERS must be at least 1")
        if self.mc_samples < 1000:
            raise ConfigurationError("LARMOR_MC_SAMPLES must be at least 1000")


# Global settings instance
_settings: Optional[LarmorSettings] = None


def get_settings() -> LarmorSettings:
    """Get the global settings instance."""
    global _settings
    if _settings is None:
        _settings = LarmorSettings.from_env()
        logger.debug("Loaded settings: %s", _settings)
    return _settings


def reset_settings():
    """Forget the cached settings so the next call re-reads the environment."""
    global _settings
    _settings = None
