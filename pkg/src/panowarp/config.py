import os
from typing import Optional
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ConfigDict, ValidationError

from .errors import InputValidationError

# ==================== SETTINGS ====================

class Settings(BaseModel):
    """Process-wide defaults, read from the environment (and .env) at startup."""
    model_config = ConfigDict(validate_assignment=True, extra='forbid')

    threads: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)
    backend: str = Field(default="pullpush")
    backend_timeout_sec: float = Field(default=120.0, gt=0)
    max_concurrent_backends: int = Field(default=6, ge=1)
    inpaint_token: Optional[str] = Field(default=None)
    quiet: bool = Field(default=False)


def load_settings(threads: Optional[int] = None, quiet: bool = False) -> Settings:
    """Build Settings from PANOWARP_* variables; explicit arguments win."""
    load_dotenv()

    values = {}
    env_map = {
        "PANOWARP_THREADS": "threads",
        "PANOWARP_BACKEND": "backend",
        "PANOWARP_BACKEND_TIMEOUT_SEC": "backend_timeout_sec",
        "PANOWARP_MAX_CONCURRENT_BACKENDS": "max_concurrent_backends",
        "PANOWARP_INPAINT_TOKEN": "inpaint_token",
    }
    for env_name, key in env_map.items():
        raw = os.getenv(env_name)
        if raw is not None and raw.strip() != "":
            values[key] = raw.strip()
    if threads is not None:
        values["threads"] = threads
    values["quiet"] = quiet

    try:
        return Settings(**values)
    except ValidationError as e:
        raise InputValidationError(f"invalid PANOWARP_* environment: {e.errors()[0]['msg']}") from e


def resolve_threads(threads: Optional[int] = None) -> int:
    """Explicit value, else the configured setting, else PANOWARP_THREADS, else CPU count."""
    if threads is not None:
        return max(1, int(threads))
    from . import instances
    if instances.settings is not None:
        return instances.settings.threads
    raw = os.getenv("PANOWARP_THREADS")
    if raw and raw.strip().isdigit() and int(raw) > 0:
        return int(raw)
    return os.cpu_count() or 1
