"""Training-run directory: epoch checkpoints, the final network and CSV logs.

::

    checkpoints/epoch<NNN>.pt
    segnet.pt
    steps.csv     one row per episode
    epochs.csv    one row per epoch
"""

from __future__ import annotations

import csv
from collections.abc import Sequence
from pathlib import Path

from pydantic import BaseModel

from mapdg.domains.meta_trainer.schemas import EPOCH_COLUMNS, STEP_COLUMNS, EpisodeReport

SEGNET_KIND = "segnet"


def _write_rows(path: Path, columns: Sequence[str], rows: Sequence[BaseModel]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with tmp.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            values = row.model_dump()
            writer.writerow([repr(values[c]) if isinstance(values[c], float) else values[c] for c in columns])
    tmp.replace(path)


def read_rows(path: Path) -> list[dict[str, str]]:
    with path.open("r", newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


class TrainingRunRepository:
    def __init__(self, root: Path) -> None:
        self._root = root

    @property
    def root(self) -> Path:
        return self._root

    @property
    def final_path(self) -> Path:
        return self._root / "segnet.pt"

    @property
    def steps_path(self) -> Path:
        return self._root / "steps.csv"

    @property
    def epochs_path(self) -> Path:
        return self._root / "epochs.csv"

    def checkpoint_path(self, epoch: int) -> Path:
        return self._root / "checkpoints" / f"epoch{epoch:03d}.pt"

    def latest_checkpoint(self) -> Path | None:
        found = sorted((self._root / "checkpoints").glob("epoch*.pt"))
        return found[-1] if found else None

    def write_logs(self, report: EpisodeReport) -> None:
        _write_rows(self.steps_path, STEP_COLUMNS, report.steps)
        _write_rows(self.epochs_path, EPOCH_COLUMNS, report.epochs)


__all__ = ["SEGNET_KIND", "TrainingRunRepository", "read_rows"]
