from __future__ import annotations

from pathlib import Path
from typing import ClassVar, cast
from zoneinfo import ZoneInfo, ZoneInfoNotFoundError

from pydantic import Field, HttpUrl, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from mapdg.core.version import get_app_version

_DEFAULT_TIMEZONE = "UTC"


def _settings_config(env_files: tuple[str, ...]) -> SettingsConfigDict:
    return SettingsConfigDict(
        env_file=env_files,
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )


class AppBaseSettings(BaseSettings):
    # --- App ---
    APP_NAME: str = Field(default="mapdg", description="Human-readable tool name stamped on logs and manifests")
    DEBUG: bool = Field(default=False, description="Enable debug behaviours like loguru backtraces")
    ENVIRONMENT: str = Field(default="development", description="Current environment name")
    VERSION: str = Field(default_factory=get_app_version, description="Semantic tool version (auto-derived from Git tags)")

    # --- Localization ---
    TIMEZONE: str = Field(default=_DEFAULT_TIMEZONE, description="IANA timezone name for manifest timestamps")

    # --- Logging ---
    LOG_LEVEL: str = Field(default="INFO", description="Base log level for the whole tool")
    LOG_CONSOLE_ENABLED: bool = Field(default=True, description="Emit logs to stderr")
    LOG_JSON: bool = Field(default=False, description="Serialize console logs as JSON lines")
    LOG_FILE_ENABLED: bool = Field(default=True, description="Write a JSON log file next to each command's outputs")

    # --- Tracing ---
    TRACING_ENABLED: bool = Field(default=False, description="Enable OpenTelemetry tracing")
    TRACING_SAMPLE_RATIO: float = Field(
        default=1.0,
        ge=0.0,
        le=1.0,
        description="Probability (0-1) of sampling new root spans",
    )
    OTLP_ENDPOINT: HttpUrl = Field(
        default=cast(HttpUrl, "http://localhost:4318/v1/traces"),
        description="OTLP HTTP endpoint for trace export",
    )
    OTLP_TIMEOUT_SECONDS: float = Field(default=5.0, gt=0.0, description="Timeout in seconds for OTLP export requests")

    # --- Compute ---
    TORCH_NUM_THREADS: int = Field(default=0, ge=0, description="Intra-op torch threads; 0 keeps the torch default")
    DETERMINISTIC: bool = Field(
        default=False,
        description="Force deterministic torch kernels and a single thread (overridden by --deterministic)",
    )

    default_env_files: ClassVar[tuple[str, ...]] = (".env",)

    model_config = _settings_config(default_env_files)

    @field_validator("TIMEZONE")
    @classmethod
    def _known_timezone(cls, value: str) -> str:
        # unknown names fall back to UTC
        name = value.strip() or _DEFAULT_TIMEZONE
        try:
            ZoneInfo(name)
        except (ZoneInfoNotFoundError, ValueError):
            return _DEFAULT_TIMEZONE
        return name

    @property
    def tzinfo(self) -> ZoneInfo:
        return ZoneInfo(self.TIMEZONE)

    @classmethod
    def with_env_files(cls, env_files: list[Path] | None) -> type["AppBaseSettings"]:
        """Subclass reading ``env_files`` (later files win) instead of the class defaults."""
        files = tuple(str(path) for path in env_files) if env_files else cls.default_env_files

        class ConfiguredSettings(cls):  # type: ignore[misc, valid-type]
            model_config = _settings_config(files)

        ConfiguredSettings.__name__ = f"Configured{cls.__name__}"
        return ConfiguredSettings
