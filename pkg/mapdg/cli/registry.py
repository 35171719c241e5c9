from __future__ import annotations

import argparse
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from mapdg.cli.config import RunConfig
    from mapdg.cli.manifest import RunManifest


@dataclass
class CommandContext:
    """What a command handler gets: the resolved configuration and where to write."""

    name: str
    config: "RunConfig"
    out: Path
    workdir: Path
    deterministic: bool
    args: argparse.Namespace
    manifest: "RunManifest"

    @property
    def seed(self) -> int:
        return self.config.seed

    def stage_dir(self, name: str) -> Path:
        """Sibling output directory of another command, e.g. ``data`` or ``pseudo``."""
        return self.out / name

    def record_input(self, path: Path) -> None:
        self.manifest.inputs.append(str(path))

    def record_output(self, path: Path) -> None:
        self.manifest.outputs.append(str(path))


@dataclass(frozen=True)
class CommandSpec:
    name: str
    help: str
    output_dir: str
    handler: Callable[[CommandContext], None]
    add_arguments: Callable[[argparse.ArgumentParser], None] | None = None
    order: int = 100


__all__ = ["CommandContext", "CommandSpec"]
