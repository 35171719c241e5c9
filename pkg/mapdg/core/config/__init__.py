"""Process-wide settings, picked by environment name.

``MAPDG_ENV`` (or ``ENVIRONMENT``) selects the settings class; ``.env`` and
``.env.<name>`` in the working directory are layered on top when present.
Run parameters (data sizes, epochs, learning rates) are not settings: they
live in the TOML run config handled by :mod:`mapdg.cli.config`.
"""

from __future__ import annotations

import os
from pathlib import Path

from .base import AppBaseSettings
from .dev import DevelopmentSettings
from .prod import ProductionSettings

_ENV_VARS = ("MAPDG_ENV", "ENVIRONMENT")

_SETTINGS_BY_ENV: dict[str, type[AppBaseSettings]] = {
    "development": DevelopmentSettings,
    "dev": DevelopmentSettings,
    "test": DevelopmentSettings,
    "production": ProductionSettings,
    "prod": ProductionSettings,
    "batch": ProductionSettings,
}


def _env_name_from_file(path: Path) -> str | None:
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except (OSError, UnicodeDecodeError):
        return None
    for line in lines:
        key, sep, value = line.strip().partition("=")
        if sep and key.strip() in _ENV_VARS:
            return value.strip().strip("'\"")
    return None


def resolve_environment() -> str:
    for var in _ENV_VARS:
        candidate = os.environ.get(var)
        if candidate:
            return candidate.strip().lower()
    dotenv = Path(".env")
    from_file = _env_name_from_file(dotenv) if dotenv.exists() else None
    return (from_file or "development").strip().lower()


def load_settings(env_name: str | None = None) -> AppBaseSettings:
    name = env_name or resolve_environment()
    settings_cls = _SETTINGS_BY_ENV.get(name, DevelopmentSettings)
    env_files = [path for path in (Path(".env"), Path(f".env.{name}")) if path.exists()]
    return settings_cls.with_env_files(env_files)()  # type: ignore[call-arg]


settings: AppBaseSettings = load_settings()

__all__ = [
    "settings",
    "load_settings",
    "resolve_environment",
    "AppBaseSettings",
    "DevelopmentSettings",
    "ProductionSettings",
]
