"""Service configuration: flat key=value file with environment overrides."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

ENV_OVERRIDES = {
    "WORKBENCH_BIND": "bind",
    "WORKBENCH_PORT": "port",
    "WORKBENCH_DATA_DIR": "data_dir",
}


@dataclass
class Config:
    bind: str = "127.0.0.1"
    port: int = 8180
    data_dir: str = "./workbench-data"
    poll_interval: float = 0.25
    poll_timeout: float = 30.0
    log_level: str = "info"
    cors_origin: str = "*"

    def __post_init__(self):
        if not 1 <= self.port <= 65535:
            raise ValueError(f"port {self.port} out of range")
        if self.poll_interval <= 0 or self.poll_timeout <= 0:
            raise ValueError("poll interval and timeout must be positive")


_FIELD_PARSERS = {
    "bind": str,
    "port": int,
    "data_dir": str,
    "poll_interval": float,
    "poll_timeout": float,
    "log_level": str,
    "cors_origin": str,
}


def load_config(path: Optional[str] = None, env=os.environ) -> Config:
    """Read ``key = value`` lines, then apply environment overrides."""
    values: dict = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected key = value")
                key, _, raw = line.partition("=")
                key = key.strip()
                if key not in _FIELD_PARSERS:
                    raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
                values[key] = _FIELD_PARSERS[key](raw.strip())
    for env_name, key in ENV_OVERRIDES.items():
        if env_name in env:
            values[key] = _FIELD_PARSERS[key](env[env_name])
    return Config(**values)
