from __future__ import annotations
from .base import AppBaseSettings

class DevelopmentSettings(AppBaseSettings):
    """Defaults tuned for interactive runs on a workstation."""
    DEBUG: bool = True
    LOG_LEVEL: str = "DEBUG"
    LOG_JSON: bool = False
