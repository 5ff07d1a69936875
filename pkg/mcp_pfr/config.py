"""Runtime settings read from the environment (CLI flags override them)."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    return int(raw) if raw else default


def _env_float(name: str, default: float) -> float:
    raw = os.environ.get(name)
    return float(raw) if raw else default


@dataclass(frozen=True)
class Settings:
    enum_cap: int = 2**20
    max_frame: int = 2**31
    timeout: float = 10.0
    log_level: str = "WARNING"
    db_dir: str = "."

    @classmethod
    def from_env(cls) -> "Settings":
        return cls(
            enum_cap=_env_int("PFR_ENUM_CAP", cls.enum_cap),
            max_frame=_env_int("PFR_MAX_FRAME", cls.max_frame),
            timeout=_env_float("PFR_TIMEOUT", cls.timeout),
            log_level=os.environ.get("PFR_LOG_LEVEL", cls.log_level).upper(),
            db_dir=os.environ.get("PFR_DB_DIR", cls.db_dir),
        )

    def override(self, **changes) -> "Settings":
        """Return a copy with every non-None keyword applied."""
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


# read once at import; library calls without explicit settings use these
DEFAULT_SETTINGS = Settings.from_env()
