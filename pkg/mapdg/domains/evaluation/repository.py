from __future__ import annotations

import csv
from collections.abc import Sequence
from pathlib import Path
from typing import TextIO

import numpy as np

from mapdg.domains.evaluation.ablation import format_ablation_table
from mapdg.domains.evaluation.schemas import AblationCell, ComparisonRow, MetricRecord, ProbeReport
from mapdg.domains.evaluation.service import format_comparison
from mapdg.domains.phantom.repository import write_label

METRIC_COLUMNS: tuple[str, ...] = tuple(MetricRecord.model_fields)
COMPARISON_COLUMNS: tuple[str, ...] = tuple(ComparisonRow.model_fields)


class EvaluationRepository:
    """CSV and text outputs of ``eval`` and ``ablation`` runs."""

    def __init__(self, root: Path) -> None:
        self._root = root

    @property
    def root(self) -> Path:
        return self._root

    def _open(self, name: str) -> TextIO:
        self._root.mkdir(parents=True, exist_ok=True)
        return (self._root / name).open("w", newline="", encoding="utf-8")

    def write_metrics(self, records: Sequence[MetricRecord], name: str = "metrics.csv") -> Path:
        with self._open(name) as handle:
            writer = csv.DictWriter(handle, fieldnames=list(METRIC_COLUMNS), lineterminator="\n")
            writer.writeheader()
            for record in records:
                writer.writerow(record.model_dump())
        return self._root / name

    def write_comparison(self, rows: Sequence[ComparisonRow]) -> Path:
        with self._open("comparison.csv") as handle:
            writer = csv.DictWriter(handle, fieldnames=list(COMPARISON_COLUMNS), lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow(row.model_dump())
        (self._root / "comparison.txt").write_text(format_comparison(rows), encoding="utf-8")
        return self._root / "comparison.csv"

    def write_ablation(self, cells: Sequence[AblationCell]) -> Path:
        shifts = sorted({s for cell in cells for s in cell.per_shift})
        with self._open("ablation.csv") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["episodic", "use_sim", "use_ncc", *(f"type_{s}" for s in shifts), "overall", "per_seed"])
            for cell in cells:
                writer.writerow(
                    [
                        int(cell.flags.episodic),
                        int(cell.flags.use_sim),
                        int(cell.flags.use_ncc),
                        *(repr(cell.per_shift.get(s, float("nan"))) for s in shifts),
                        repr(cell.overall),
                        ";".join(repr(v) for v in cell.per_seed),
                    ]
                )
        (self._root / "ablation.txt").write_text(format_ablation_table(cells), encoding="utf-8")
        return self._root / "ablation.csv"

    def write_probe(self, report: ProbeReport) -> Path:
        path = self._root / "probe.json"
        self._root.mkdir(parents=True, exist_ok=True)
        path.write_text(report.model_dump_json(indent=2), encoding="utf-8")
        return path

    def write_predictions(self, method: str, items_and_masks: Sequence[tuple[int, str, np.ndarray]]) -> Path:
        directory = self._root / "predictions" / method
        for subject_id, domain, mask in items_and_masks:
            write_label(directory / f"s{subject_id:04d}_{domain}.png", mask)
        return directory


__all__ = ["COMPARISON_COLUMNS", "EvaluationRepository", "METRIC_COLUMNS"]
