"""Dataset and bank persistence through the filesystem."""

from __future__ import annotations

import numpy as np
import pytest

from mapdg.domains.phantom.repository import (
    MANIFEST_HEADER,
    ManifestFormatError,
    PhantomRepository,
    read_manifest,
)
from mapdg.domains.pseudomod.repository import BankRepository

QUANTUM = 1.0 / 65535.0


def test_split_survives_disk(tmp_path, small_split):
    repository = PhantomRepository(tmp_path / "data")
    manifest = repository.save_split(small_split)

    assert manifest.read_text(encoding="utf-8").splitlines()[0] == MANIFEST_HEADER
    loaded = repository.load_split()

    assert loaded.seed == small_split.seed
    assert loaded.train_subjects == small_split.train_subjects
    assert [f.name for f in loaded.target_families] == [f.name for f in small_split.target_families]
    for original in small_split.train:
        restored = next(item for item in loaded.train if item.subject_id == original.subject_id)
        np.testing.assert_array_equal(restored.vessel_map.pixels, original.vessel_map.pixels)
        np.testing.assert_allclose(restored.rendering.image, original.rendering.image, atol=QUANTUM)
        assert restored.family == original.family
    assert len(loaded.test) == len(small_split.test)


def test_manifest_version_checked(tmp_path, small_split):
    repository = PhantomRepository(tmp_path)
    path = repository.save_split(small_split)
    text = path.read_text(encoding="utf-8").replace(MANIFEST_HEADER, "# mapdg-manifest v99")
    path.write_text(text, encoding="utf-8")

    with pytest.raises(ManifestFormatError):
        read_manifest(path)


def test_bank_survives_disk(tmp_path, small_split, tiny_bank):
    repository = BankRepository(tmp_path / "pseudo")
    repository.save_bank(tiny_bank, small_split.train)

    loaded = repository.load_bank()

    assert loaded.subject_ids == tiny_bank.subject_ids
    for original, restored in zip(tiny_bank, loaded):
        for k in range(4):
            np.testing.assert_allclose(restored.modality(k), original.modality(k), atol=QUANTUM)
        np.testing.assert_array_equal(restored.label, original.label)
    records = read_manifest(repository.manifest_path)
    assert all(record.d0 and record.d3 for record in records)
