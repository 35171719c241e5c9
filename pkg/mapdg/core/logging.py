from __future__ import annotations

import logging
import os
import socket
import sys
from pathlib import Path
from typing import Final

from loguru import logger as _logger

from mapdg.core.config import settings
from mapdg.core.context import (
    get_run_context,
    reset_run_context,
    update_run_context,
)

_LOGGER_CONFIGURED: bool = False
_RUN_FILE_SINKS: dict[Path, int] = {}

def _get_static_extra() -> dict[str, str | int]:
    """Get static extra fields for logging, computed once"""
    return {
        "app": settings.APP_NAME,
        "environment": settings.ENVIRONMENT,
        "version": settings.VERSION,
        "host": socket.gethostname(),
        "pid": os.getpid(),
    }

_STATIC_EXTRA: Final = _get_static_extra()

_LOGGER_NAMES_TO_INTERCEPT: Final = (
    "torch",
    "opentelemetry",
    "py.warnings",
)

_CONSOLE_FORMAT: Final = (
    "<green>{time:HH:mm:ss.SSS}</green> | <level>{level: <7}</level> | "
    "<cyan>{extra[command]}</cyan>:<cyan>{extra[stage]}</cyan> | {message}"
)


class InterceptHandler(logging.Handler):
    def emit(self, record: logging.LogRecord) -> None:  # noqa: D401
        try:
            level = _logger.level(record.levelname).name
        except ValueError:
            level = record.levelno

        frame, depth = logging.currentframe(), 2
        while frame and frame.f_code.co_filename == logging.__file__:  # check for logging module file
            frame = frame.f_back
            depth += 1

        _logger.opt(depth=depth, exception=record.exc_info).log(level, record.getMessage())


def _setup_stdlib_logging(level: int) -> None:
    handler = InterceptHandler()  # custom handler to route stdlib logs to loguru
    logging.basicConfig(handlers=[handler], level=level, force=True)
    logging.captureWarnings(True)

    for name in _LOGGER_NAMES_TO_INTERCEPT:
        std_logger = logging.getLogger(name)
        std_logger.handlers = [handler]
        std_logger.propagate = False
        std_logger.setLevel(level)


def _patch_record(record: dict) -> None:
    """Inject run context into every log record"""
    extra = record.setdefault("extra", {})
    extra.update(get_run_context())
    # the console format references these two keys
    extra.setdefault("command", "-")
    extra.setdefault("stage", "-")


def setup_logging() -> None:
    global _LOGGER_CONFIGURED
    if _LOGGER_CONFIGURED:
        return

    _logger.remove()
    _logger.configure(extra=_STATIC_EXTRA, patcher=_patch_record)  # type: ignore[arg-type]

    level = getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO)

    if settings.LOG_CONSOLE_ENABLED:
        _logger.add(
            sys.stderr,
            level=settings.LOG_LEVEL.upper(),
            serialize=settings.LOG_JSON,
            format="{message}" if settings.LOG_JSON else _CONSOLE_FORMAT,
            backtrace=settings.DEBUG,
            diagnose=settings.DEBUG,
        )

    _setup_stdlib_logging(level)

    _LOGGER_CONFIGURED = True


def add_run_log_file(directory: Path, name: str = "run.log.jsonl") -> Path | None:
    """Attach a JSON-lines sink for one command's output directory."""
    if not settings.LOG_FILE_ENABLED:
        return None
    path = (directory / name).resolve()
    if path in _RUN_FILE_SINKS:
        return path
    directory.mkdir(parents=True, exist_ok=True)
    sink_id = _logger.add(path, level=settings.LOG_LEVEL.upper(), serialize=True, mode="a")
    _RUN_FILE_SINKS[path] = sink_id
    return path


def remove_run_log_file(path: Path | None) -> None:
    if path is None:
        return
    sink_id = _RUN_FILE_SINKS.pop(path.resolve(), None)
    if sink_id is not None:
        _logger.remove(sink_id)


logger = _logger

__all__ = [
    "logger",
    "setup_logging",
    "add_run_log_file",
    "remove_run_log_file",
    "update_run_context",
    "reset_run_context",
    "get_run_context",
]
