from __future__ import annotations
from .base import AppBaseSettings

class ProductionSettings(AppBaseSettings):
    """Defaults tuned for unattended batch runs"""

    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"
    LOG_JSON: bool = True
    DETERMINISTIC: bool = True
