"""
Environment-driven defaults for builds, benchmarks and logging
"""

import os
from dataclasses import dataclass

from dotenv import load_dotenv

from src.errors import ConfigError

MERSENNE_61 = (1 << 61) - 1


def _int_env(name, default):
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw, 0)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}")


def _bool_env(name, default):
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    return raw.strip().lower() not in ("0", "false", "no", "off")


@dataclass(frozen=True)
class Settings:
    k: int = 2
    seed: int = 0
    kr_modulus: int = MERSENNE_61
    query_count: int = 1000
    hop_check: bool = True
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls):
        """Read B2DT_* variables, loading a .env file first if present"""
        load_dotenv()

        settings = cls(
            k=_int_env("B2DT_K", cls.k),
            seed=_int_env("B2DT_SEED", cls.seed),
            kr_modulus=_int_env("B2DT_KR_MODULUS", cls.kr_modulus),
            query_count=_int_env("B2DT_QUERY_COUNT", cls.query_count),
            hop_check=_bool_env("B2DT_HOP_CHECK", cls.hop_check),
            log_level=os.getenv("B2DT_LOG_LEVEL", cls.log_level).upper(),
        )
        if settings.k < 2:
            raise ConfigError(f"B2DT_K must be at least 2, got {settings.k}")
        if settings.query_count < 1:
            raise ConfigError("B2DT_QUERY_COUNT must be positive")
        return settings
