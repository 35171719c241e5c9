"""Persistence of synthesis checkpoints and pseudo-modality banks.

A bank directory is a phantom dataset directory whose manifest fills the
``d0``..``d3`` columns::

    manifest.csv
    images/   source renderings
    labels/   vessel maps
    bank/d<k>/s<id>.png
    synthesis/seed<N>.pt
"""

from __future__ import annotations

from collections.abc import Sequence
from pathlib import Path

from mapdg.core.errors import MapInputError
from mapdg.core.logging import logger
from mapdg.domains.phantom.repository import (
    ManifestRecord,
    read_label,
    read_manifest,
    read_unit_image,
    write_label,
    write_manifest,
    write_unit_image,
)
from mapdg.domains.phantom.schemas import PhantomItem
from mapdg.domains.pseudomod.schemas import PSEUDO_MODALITIES, BankEntry, PseudoModalityBank, SynthesisConfig
from mapdg.domains.pseudomod.service import SynthesisRun
from mapdg.domains.segnet.checkpoint import load_checkpoint, save_checkpoint
from mapdg.domains.segnet.networks import SynthesisNet

SYNTHESIS_KIND = "synthesis"


class BankRepository:
    def __init__(self, root: Path) -> None:
        self._root = root

    @property
    def root(self) -> Path:
        return self._root

    @property
    def manifest_path(self) -> Path:
        return self._root / "manifest.csv"

    def checkpoint_path(self, seed: int) -> Path:
        return self._root / "synthesis" / f"seed{seed}.pt"

    def modality_path(self, k: int, subject_id: int) -> Path:
        return self._root / "bank" / f"d{k}" / f"s{subject_id:04d}.png"

    def save_runs(self, runs: Sequence[SynthesisRun], config: SynthesisConfig) -> list[Path]:
        paths: list[Path] = []
        for run in runs:
            paths.append(
                save_checkpoint(
                    self.checkpoint_path(run.seed),
                    run.net,
                    kind=SYNTHESIS_KIND,
                    config={
                        "seed": run.seed,
                        "channels": list(config.channels),
                        "initial_loss": run.initial_loss,
                        "final_loss": run.final_loss,
                        "epoch_losses": run.epoch_losses,
                    },
                )
            )
        return paths

    def load_nets(self, config: SynthesisConfig) -> list[SynthesisNet]:
        nets: list[SynthesisNet] = []
        for seed in config.seeds:
            net = SynthesisNet(config.channels)
            load_checkpoint(self.checkpoint_path(seed), net, kind=SYNTHESIS_KIND)
            nets.append(net.eval())
        return nets

    def save_bank(self, bank: PseudoModalityBank, items: Sequence[PhantomItem]) -> Path:
        by_subject = {item.subject_id: item for item in items}
        missing = sorted(set(bank.subject_ids) - set(by_subject))
        if missing:
            raise MapInputError(f"Bank subjects {missing} have no source item")

        records: list[ManifestRecord] = []
        for entry in bank:
            item = by_subject[entry.subject_id]
            image = self._root / "images" / f"s{entry.subject_id:04d}_{item.family.name}.png"
            label = self._root / "labels" / f"s{entry.subject_id:04d}.png"
            write_unit_image(image, item.rendering.image)
            write_label(label, entry.label)
            columns: dict[str, str] = {}
            for k in range(PSEUDO_MODALITIES):
                path = self.modality_path(k, entry.subject_id)
                write_unit_image(path, entry.modality(k))
                columns[f"d{k}"] = path.relative_to(self._root).as_posix()
            records.append(
                ManifestRecord(
                    subject_id=entry.subject_id,
                    split=item.split,
                    style=item.family.name,
                    modality=item.family.modality.value,
                    shift_type=item.family.shift_type.value,
                    image=image.relative_to(self._root).as_posix(),
                    label=label.relative_to(self._root).as_posix(),
                    **columns,
                )
            )
        write_manifest(self.manifest_path, records)
        logger.bind(event="save_bank", root=str(self._root), entries=len(records)).info("Bank written")
        return self.manifest_path

    def load_bank(self) -> PseudoModalityBank:
        """Read a bank back; images pass through 16-bit PNG, so values are quantized to 1/65535."""
        entries: list[BankEntry] = []
        for record in read_manifest(self.manifest_path):
            paths = (record.d0, record.d1, record.d2, record.d3)
            if not all(paths):
                raise MapInputError(f"Manifest row for subject {record.subject_id} lacks pseudo-modality paths")
            x0, x1, x2, x3 = (read_unit_image(self._root / p) for p in paths)
            entries.append(
                BankEntry(
                    subject_id=record.subject_id,
                    x0=x0,
                    x1=x1,
                    x2=x2,
                    x3=x3,
                    label=read_label(self._root / record.label),
                )
            )
        return PseudoModalityBank(entries=tuple(sorted(entries, key=lambda e: e.subject_id)))


__all__ = ["BankRepository", "SYNTHESIS_KIND"]
