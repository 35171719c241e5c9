"""Filesystem persistence for phantom datasets.

Layout under the dataset root::

    manifest.csv      one record per rendering (see MANIFEST_COLUMNS)
    families.json     the StyleFamily definitions used, keyed by name
    images/           16-bit grayscale PNG per rendering
    labels/           8-bit PNG per subject (0 / 255)

The manifest's first line is ``# mapdg-manifest v<N>``; readers reject
other versions. Pseudo-modality banks reuse the same file and fill the
``d0``..``d3`` columns.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import cv2
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter

from mapdg.core.errors import MapInputError, MapRuntimeError
from mapdg.core.logging import logger
from mapdg.domains.phantom.schemas import (
    DatasetSplit,
    PhantomItem,
    Split,
    StyleFamily,
    StyleRendering,
    VesselMap,
)

MANIFEST_VERSION = 1
MANIFEST_HEADER = f"# mapdg-manifest v{MANIFEST_VERSION}"
MANIFEST_NAME = "manifest.csv"
FAMILIES_NAME = "families.json"
SPLIT_META_NAME = "split.json"

_UINT16_MAX = 65535.0


class ManifestFormatError(MapRuntimeError):
    def __init__(self, path: Path, reason: str) -> None:
        self.path = path
        super().__init__(f"Unreadable manifest {path}: {reason}")


class ManifestRecord(BaseModel):
    subject_id: int = Field(ge=0)
    split: Split
    style: str
    modality: str
    shift_type: str
    image: str
    label: str
    d0: str = ""
    d1: str = ""
    d2: str = ""
    d3: str = ""

    model_config = ConfigDict(frozen=True)


MANIFEST_COLUMNS: tuple[str, ...] = tuple(ManifestRecord.model_fields)


def write_unit_image(path: Path, image: np.ndarray) -> None:
    """Store a [0, 1] float image as a lossless 16-bit PNG."""
    path.parent.mkdir(parents=True, exist_ok=True)
    quantized = np.round(np.clip(image, 0.0, 1.0) * _UINT16_MAX).astype(np.uint16)
    if not cv2.imwrite(str(path), quantized):
        raise MapRuntimeError(f"Could not write image {path}")


def read_unit_image(path: Path) -> np.ndarray:
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise MapRuntimeError(f"Could not read image {path}")
    scale = _UINT16_MAX if raw.dtype == np.uint16 else 255.0
    return (raw.astype(np.float32) / scale).astype(np.float32)


def write_label(path: Path, pixels: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if not cv2.imwrite(str(path), (pixels > 0).astype(np.uint8) * 255):
        raise MapRuntimeError(f"Could not write label {path}")


def read_label(path: Path) -> np.ndarray:
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise MapRuntimeError(f"Could not read label {path}")
    return (raw > 127).astype(np.uint8)


def write_manifest(path: Path, records: list[ManifestRecord]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    ordered = sorted(records, key=lambda r: (r.split.value, r.subject_id, r.style))
    with path.open("w", newline="", encoding="utf-8") as handle:
        handle.write(MANIFEST_HEADER + "\n")
        writer = csv.DictWriter(handle, fieldnames=list(MANIFEST_COLUMNS), lineterminator="\n")
        writer.writeheader()
        for record in ordered:
            writer.writerow(record.model_dump(mode="json"))


def read_manifest(path: Path) -> list[ManifestRecord]:
    if not path.exists():
        raise ManifestFormatError(path, "file does not exist")
    with path.open("r", newline="", encoding="utf-8") as handle:
        first = handle.readline().strip()
        if first != MANIFEST_HEADER:
            raise ManifestFormatError(path, f"expected header '{MANIFEST_HEADER}', found '{first}'")
        reader = csv.DictReader(handle)
        if tuple(reader.fieldnames or ()) != MANIFEST_COLUMNS:
            raise ManifestFormatError(path, f"unexpected columns {reader.fieldnames}")
        return [ManifestRecord.model_validate(row) for row in reader]


_FAMILIES_ADAPTER = TypeAdapter(dict[str, StyleFamily])


class PhantomRepository:
    """Reads and writes one dataset directory."""

    def __init__(self, root: Path) -> None:
        self._root = root

    @property
    def root(self) -> Path:
        return self._root

    @property
    def manifest_path(self) -> Path:
        return self._root / MANIFEST_NAME

    def image_path(self, subject_id: int, style: str) -> Path:
        return self._root / "images" / f"s{subject_id:04d}_{style}.png"

    def label_path(self, subject_id: int) -> Path:
        return self._root / "labels" / f"s{subject_id:04d}.png"

    def save_split(self, split: DatasetSplit) -> Path:
        try:
            self._root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise MapInputError(f"Output directory {self._root} is not writable: {exc}") from exc

        records: list[ManifestRecord] = []
        written_labels: set[int] = set()
        for item in (*split.train, *split.test):
            image_path = self.image_path(item.subject_id, item.family.name)
            label_path = self.label_path(item.subject_id)
            write_unit_image(image_path, item.rendering.image)
            if item.subject_id not in written_labels:
                write_label(label_path, item.vessel_map.pixels)
                written_labels.add(item.subject_id)
            records.append(
                ManifestRecord(
                    subject_id=item.subject_id,
                    split=item.split,
                    style=item.family.name,
                    modality=item.family.modality.value,
                    shift_type=item.family.shift_type.value,
                    image=image_path.relative_to(self._root).as_posix(),
                    label=label_path.relative_to(self._root).as_posix(),
                )
            )

        families = {family.name: family for family in (*split.source_families, *split.target_families)}
        (self._root / FAMILIES_NAME).write_bytes(_FAMILIES_ADAPTER.dump_json(families, indent=2))
        (self._root / SPLIT_META_NAME).write_text(
            json.dumps(
                {
                    "seed": split.seed,
                    "source_families": [f.name for f in split.source_families],
                    "target_families": [f.name for f in split.target_families],
                },
                indent=2,
            ),
            encoding="utf-8",
        )
        write_manifest(self.manifest_path, records)
        logger.bind(event="save_split", root=str(self._root), records=len(records)).info("Dataset written")
        return self.manifest_path

    def load_split(self) -> DatasetSplit:
        records = read_manifest(self.manifest_path)
        families = _FAMILIES_ADAPTER.validate_json((self._root / FAMILIES_NAME).read_bytes())
        meta = json.loads((self._root / SPLIT_META_NAME).read_text(encoding="utf-8"))

        labels: dict[int, VesselMap] = {}
        train: list[PhantomItem] = []
        test: list[PhantomItem] = []
        for record in records:
            if record.subject_id not in labels:
                labels[record.subject_id] = VesselMap(
                    pixels=read_label(self._root / record.label), subject_id=record.subject_id
                )
            item = PhantomItem(
                subject_id=record.subject_id,
                split=record.split,
                family=families[record.style],
                vessel_map=labels[record.subject_id],
                rendering=StyleRendering(
                    image=read_unit_image(self._root / record.image),
                    style=record.style,
                    subject_id=record.subject_id,
                ),
            )
            (train if record.split is Split.TRAIN else test).append(item)

        return DatasetSplit(
            train=tuple(sorted(train, key=lambda i: i.subject_id)),
            test=tuple(sorted(test, key=lambda i: (i.subject_id, i.family.name))),
            source_families=tuple(families[name] for name in meta["source_families"]),
            target_families=tuple(families[name] for name in meta["target_families"]),
            seed=int(meta["seed"]),
        )


__all__ = [
    "MANIFEST_COLUMNS",
    "MANIFEST_HEADER",
    "MANIFEST_VERSION",
    "ManifestFormatError",
    "ManifestRecord",
    "PhantomRepository",
    "read_label",
    "read_manifest",
    "read_unit_image",
    "write_label",
    "write_manifest",
    "write_unit_image",
]
