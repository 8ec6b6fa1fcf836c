"""
Runtime settings for the O-information toolkit.
Values come from the environment (or a local .env file) with safe defaults.
"""
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

DEFAULT_FRED_API_BASE = "https://api.stlouisfed.org/fred/series/observations"


@dataclass(frozen=True)
class Settings:
    """
    Process-wide defaults.

    Explicit function arguments always win over these values; settings only
    fill in what the caller left unspecified.
    """

    max_states: int = 2 ** 24
    n_jobs: int = 1
    n_boot: int = 1000
    alpha: float = 0.05
    seed: int = 0
    log_level: str = "INFO"
    fred_api_key: Optional[str] = None
    fred_api_base: str = DEFAULT_FRED_API_BASE


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}")


def _float_env(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"{name} must be a number, got {raw!r}")


def load_settings() -> Settings:
    """Read settings from the current environment (no caching)."""
    return Settings(
        max_states=_int_env("HOI_MAX_STATES", 2 ** 24),
        n_jobs=_int_env("HOI_N_JOBS", 1),
        n_boot=_int_env("HOI_N_BOOT", 1000),
        alpha=_float_env("HOI_ALPHA", 0.05),
        seed=_int_env("HOI_SEED", 0),
        log_level=os.getenv("HOI_LOG_LEVEL", "INFO").upper(),
        fred_api_key=os.getenv("FRED_API_KEY") or None,
        fred_api_base=os.getenv("FRED_API_BASE", DEFAULT_FRED_API_BASE),
    )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Cached settings for the running process."""
    return load_settings()
