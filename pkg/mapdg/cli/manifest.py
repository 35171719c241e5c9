from __future__ import annotations

from datetime import datetime
from enum import StrEnum
from pathlib import Path
from typing import Any
from uuid import uuid4

from pydantic import BaseModel, Field

from mapdg.core.config import settings
from mapdg.core.version import get_app_version

RUN_MANIFEST_NAME = "run.json"


def _now() -> datetime:
    return datetime.now(settings.tzinfo)


class RunStatus(StrEnum):
    RUNNING = "running"
    SUCCEEDED = "succeeded"
    FAILED = "failed"


class RunManifest(BaseModel):
    """Provenance of one command run; written before work starts, finalised when it ends."""

    run_id: str = Field(default_factory=lambda: uuid4().hex)
    command: str
    config: dict[str, Any]
    seed: int
    deterministic: bool
    version: str = Field(default_factory=get_app_version)
    argv: list[str] = Field(default_factory=list)
    inputs: list[str] = Field(default_factory=list)
    outputs: list[str] = Field(default_factory=list)
    started_at: datetime = Field(default_factory=_now)
    finished_at: datetime | None = None
    status: RunStatus = RunStatus.RUNNING
    exit_code: int | None = None
    error: str | None = None

    def write(self, directory: Path) -> Path:
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / RUN_MANIFEST_NAME
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(self.model_dump_json(indent=2), encoding="utf-8")
        tmp.replace(path)
        return path

    def finish(self, exit_code: int, error: str | None = None) -> None:
        self.finished_at = _now()
        self.exit_code = exit_code
        self.error = error
        self.status = RunStatus.SUCCEEDED if exit_code == 0 else RunStatus.FAILED

    @classmethod
    def read(cls, directory: Path) -> "RunManifest":
        return cls.model_validate_json((directory / RUN_MANIFEST_NAME).read_text(encoding="utf-8"))


__all__ = ["RUN_MANIFEST_NAME", "RunManifest", "RunStatus"]
