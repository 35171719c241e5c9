from __future__ import annotations

import numpy as np
import pytest

from mapdg.domains.meta_trainer.schemas import EpisodeConfig
from mapdg.domains.phantom.schemas import DatasetSplit
from mapdg.domains.pseudomod.schemas import BankEntry, PseudoModalityBank
from mapdg.domains.pseudomod.service import source_input


def _handmade_bank(split: DatasetSplit) -> PseudoModalityBank:
    entries = []
    for item in split.train:
        x0 = source_input(item)
        entries.append(
            BankEntry(
                subject_id=item.subject_id,
                x0=x0,
                x1=(1.0 - x0).astype(np.float32),
                x2=np.sqrt(x0).astype(np.float32),
                x3=(x0**2).astype(np.float32),
                label=item.vessel_map.pixels,
            )
        )
    return PseudoModalityBank(entries=tuple(entries))


@pytest.fixture(scope="session")
def tiny_bank(small_split: DatasetSplit) -> PseudoModalityBank:
    """Bank with fixed intensity transforms in place of trained synthesis networks."""
    return _handmade_bank(small_split)


@pytest.fixture()
def tiny_episode() -> EpisodeConfig:
    return EpisodeConfig(batch_size=2, epochs=1, samples_per_subject=2, seed=0)
