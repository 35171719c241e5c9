"""Synthesis-network training and bank assembly."""

from __future__ import annotations

import numpy as np
import pytest
import torch

from mapdg.core.errors import MapInputError
from mapdg.domains.pseudomod.repository import BankRepository
from mapdg.domains.pseudomod.schemas import SynthesisConfig
from mapdg.domains.pseudomod.service import (
    EmptyDatasetError,
    build_bank,
    min_style_diversity,
    source_input,
    style_diversity,
    train_synthesis,
)

FAST = SynthesisConfig(epochs=1, batch_size=2)


@pytest.fixture(scope="module")
def runs(small_split):
    return [train_synthesis(small_split.train, seed, config=FAST) for seed in FAST.seeds]


class TestTrainSynthesis:
    def test_zero_epochs_leaves_network_untouched(self, small_split):
        run = train_synthesis(small_split.train, 1, epochs=0, config=FAST)

        assert run.epoch_losses == []
        assert run.final_loss == pytest.approx(run.initial_loss)

    def test_same_seed_is_reproducible(self, small_split, runs):
        again = train_synthesis(small_split.train, FAST.seeds[0], config=FAST)

        assert again.epoch_losses == runs[0].epoch_losses
        for a, b in zip(again.net.parameters(), runs[0].net.parameters()):
            torch.testing.assert_close(a, b)

    def test_losses_are_finite(self, runs):
        for run in runs:
            assert len(run.epoch_losses) == FAST.epochs
            assert np.isfinite(run.epoch_losses).all()
            assert np.isfinite(run.final_loss)

    def test_empty_dataset(self):
        with pytest.raises(EmptyDatasetError):
            train_synthesis([], 1, config=FAST)

    def test_seeds_must_differ(self):
        with pytest.raises(ValueError):
            SynthesisConfig(seeds=(1, 1, 2))


class TestBuildBank:
    def test_entries_match_sources(self, small_split, runs):
        bank = build_bank([run.net for run in runs], small_split.train, FAST)

        assert bank.subject_ids == small_split.train_subjects
        for entry, item in zip(bank, small_split.train):
            np.testing.assert_allclose(entry.x0, source_input(item, FAST))
            np.testing.assert_array_equal(entry.label, item.vessel_map.pixels)
            for k in range(4):
                image = entry.modality(k)
                assert image.shape == item.vessel_map.shape
                assert image.min() >= 0.0 and image.max() <= 1.0

    def test_distinct_seeds_give_distinct_styles(self, small_split, runs):
        bank = build_bank([run.net for run in runs], small_split.train, FAST)

        assert min_style_diversity(bank) > 0.0
        assert set(style_diversity(bank.entries[0])) == {(1, 2), (1, 3), (2, 3)}

    def test_needs_three_networks(self, small_split, runs):
        with pytest.raises(MapInputError):
            build_bank([runs[0].net], small_split.train, FAST)

    def test_checkpoints_reload(self, tmp_path, small_split, runs):
        repository = BankRepository(tmp_path)
        paths = repository.save_runs(runs, FAST)

        nets = repository.load_nets(FAST)

        assert [p.name for p in paths] == [f"seed{s}.pt" for s in FAST.seeds]
        first = build_bank([run.net for run in runs], small_split.train, FAST)
        second = build_bank(nets, small_split.train, FAST)
        for a, b in zip(first, second):
            np.testing.assert_allclose(a.x2, b.x2, atol=1e-6)
