"""Service/CLI configuration with flag > environment > file precedence.

Environment variables use the ``MOD_`` prefix (``MOD_PORT``,
``MOD_RULES_PATH``, ``MOD_MODEL_PATH``, ``MOD_THRESHOLD``,
``MOD_FEEDBACK_DB``, ``MOD_FAIL_POLICY``). The optional config file is JSON
with the same keys as :class:`ServiceConfig`.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path
from typing import Mapping

from .decision import FailPolicy

ENV_KEYS = {
    "MOD_PORT": "port",
    "MOD_RULES_PATH": "rules_path",
    "MOD_MODEL_PATH": "model_path",
    "MOD_THRESHOLD": "threshold",
    "MOD_FEEDBACK_DB": "feedback_store_path",
    "MOD_FAIL_POLICY": "fail_policy",
}


class ConfigError(Exception):
    """Unreadable config file or invalid setting value."""


def default_rules_path() -> Path:
    return Path(str(resources.files("modpipe.data").joinpath("demo_rules.tsv")))


@dataclass(frozen=True)
class ServiceConfig:
    port: int = 8080
    rules_path: Path = None  # type: ignore[assignment]  # filled in __post_init__
    model_path: Path | None = None
    threshold: float = 0.40
    fail_policy: FailPolicy = FailPolicy.FAIL_OPEN_ALLOW
    feedback_store_path: Path = Path("feedback.db")
    verdict_cache_ttl: float = 600.0
    verdict_cache_capacity: int = 100_000

    def __post_init__(self):
        if self.rules_path is None:
            object.__setattr__(self, "rules_path", default_rules_path())
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError(f"threshold must be in (0, 1), got {self.threshold}")


_COERCERS = {
    "port": int,
    "rules_path": Path,
    "model_path": lambda v: Path(v) if v not in (None, "") else None,
    "threshold": float,
    "fail_policy": lambda v: v if isinstance(v, FailPolicy) else FailPolicy(str(v)),
    "feedback_store_path": Path,
    "verdict_cache_ttl": float,
    "verdict_cache_capacity": int,
}


def resolve_config(
    flags: Mapping[str, object] | None = None,
    env: Mapping[str, str] | None = None,
    config_file: str | Path | None = None,
) -> ServiceConfig:
    """Merge the three config sources; highest precedence wins per key."""
    merged: dict[str, object] = {}
    if config_file is not None:
        try:
            file_values = json.loads(Path(config_file).read_text("utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {config_file}: {exc}") from exc
        if not isinstance(file_values, dict):
            raise ConfigError(f"config file {config_file} must hold a JSON object")
        merged.update(file_values)
    env = os.environ if env is None else env
    for env_key, field_name in ENV_KEYS.items():
        if env_key in env and env[env_key] != "":
            merged[field_name] = env[env_key]
    for key, value in (flags or {}).items():
        if value is not None:
            merged[key] = value

    known = {f.name for f in fields(ServiceConfig)}
    unknown = set(merged) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    coerced = {}
    for key, value in merged.items():
        try:
            coerced[key] = _COERCERS[key](value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from exc
    return ServiceConfig(**coerced)
