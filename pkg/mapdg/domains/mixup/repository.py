"""Export of mixup samples for visual inspection.

Per concentration vector a directory ``alpha_<a1>_<a2>_<a3>/`` holds the
sample images, ``grid.png`` and ``lambdas.csv`` (one row per sample). An
optional ``draws.csv`` keeps a larger batch of bare λ draws.
"""

from __future__ import annotations

import csv
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from mapdg.core.logging import logger
from mapdg.domains.mixup.schemas import DirichletParams, MixupSample
from mapdg.domains.mixup.service import tile_grid
from mapdg.domains.phantom.repository import write_unit_image

LAMBDA_COLUMNS = ("subject_id", "sample_index", "lambda1", "lambda2", "lambda3")


class MixupDumpRepository:
    def __init__(self, root: Path) -> None:
        self._root = root

    def alpha_dir(self, params: DirichletParams) -> Path:
        return self._root / params.tag

    def save_samples(self, params: DirichletParams, samples: Sequence[MixupSample], *, columns: int) -> Path:
        directory = self.alpha_dir(params)
        directory.mkdir(parents=True, exist_ok=True)
        for sample in samples:
            write_unit_image(directory / f"s{sample.subject_id:04d}_m{sample.sample_index:03d}.png", sample.image)
        write_unit_image(directory / "grid.png", tile_grid([s.image for s in samples], columns))
        with (directory / "lambdas.csv").open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(LAMBDA_COLUMNS)
            for sample in samples:
                writer.writerow([sample.subject_id, sample.sample_index, *(repr(v) for v in sample.coefficients.lam)])
        logger.bind(event="dump_mixup", alpha=list(params.alpha), samples=len(samples)).info("Mixup samples written")
        return directory

    def save_draws(self, params: DirichletParams, draws: np.ndarray) -> Path:
        path = self.alpha_dir(params) / "draws.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savetxt(path, draws, delimiter=",", header="lambda1,lambda2,lambda3", comments="", fmt="%.17g")
        return path


def read_lambdas(path: Path) -> np.ndarray:
    """λ rows of a ``lambdas.csv`` or ``draws.csv`` as an n×3 array."""
    with path.open("r", newline="", encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    return np.asarray([[float(row[f"lambda{k}"]) for k in (1, 2, 3)] for row in rows], dtype=np.float64).reshape(
        -1, 3
    )


__all__ = ["LAMBDA_COLUMNS", "MixupDumpRepository", "read_lambdas"]
