"""Episodic meta-training: stage order, loss bookkeeping, schedules, resume."""

from __future__ import annotations

import pytest
import torch

from mapdg.domains.losses.schemas import LossWeights
from mapdg.domains.meta_trainer.repository import TrainingRunRepository, read_rows
from mapdg.domains.meta_trainer.schemas import EPOCH_COLUMNS, NO_META_TEST, EpisodeConfig
from mapdg.domains.meta_trainer.service import (
    EpisodicTrainer,
    entries_from_items,
    run_episode,
    train,
    train_baseline,
    with_flags,
)
from mapdg.domains.mixup.service import EmptyBankError
from mapdg.domains.pseudomod.schemas import PseudoModalityBank
from mapdg.domains.segnet.checkpoint import CheckpointMismatchError
from mapdg.domains.segnet.service import build_segnet


def _assert_same_parameters(a: torch.nn.Module, b: torch.nn.Module) -> None:
    for pa, pb in zip(a.parameters(), b.parameters(), strict=True):
        torch.testing.assert_close(pa, pb)


class TestEpisodeConfig:
    def test_step_schedule(self):
        cfg = EpisodeConfig()

        assert cfg.learning_rate(1e-3, 0) == pytest.approx(1e-3)
        assert cfg.learning_rate(1e-3, 2) == pytest.approx(1e-3)
        assert cfg.learning_rate(1e-3, 3) == pytest.approx(5e-4)
        assert cfg.learning_rate(1e-3, 7) == pytest.approx(2.5e-4)

    def test_lookahead_reserved(self):
        with pytest.raises(ValueError, match="lookahead"):
            EpisodeConfig(lookahead=True)

    def test_sim_requires_episodic(self):
        with pytest.raises(ValueError, match="episodic"):
            EpisodeConfig(episodic=False, use_sim=True)

    def test_effective_weights_zero_disabled_terms(self):
        cfg = EpisodeConfig(use_sim=False)

        assert cfg.effective_weights == LossWeights(seg=100.0, sim=0.0, ncc=1.0)
        assert not cfg.sim_active
        assert cfg.ncc_active


class TestEpisode:
    def test_stage_versions(self, tiny_bank, tiny_episode):
        trainer = EpisodicTrainer(build_segnet(0), tiny_episode)

        first = trainer.run_episode(tiny_bank.entries[:2])
        second = trainer.run_episode(tiny_bank.entries[2:])

        assert (first.version_meta_train, first.version_meta_test) == (0, 1)
        assert (second.version_meta_train, second.version_meta_test) == (2, 3)
        assert trainer.version == 4

    def test_all_terms_logged_finite(self, tiny_bank, tiny_episode):
        _, record = run_episode(build_segnet(0), tiny_bank.entries[:2], tiny_episode)

        assert record.L_sim > 0.0
        assert record.L_ncc >= 0.0
        assert record.L_test == pytest.approx(100 * record.L_seg + 100 * record.L_sim + record.L_ncc)

    def test_zero_auxiliary_weights_reduce_to_segmentation(self, tiny_bank, tiny_episode):
        cfg = with_flags(tiny_episode, weights=LossWeights(seg=100.0, sim=0.0, ncc=0.0))

        _, record = run_episode(build_segnet(0), tiny_bank.entries[:2], cfg)

        assert record.L_sim == 0.0
        assert record.L_ncc == 0.0
        assert record.L_test == pytest.approx(100 * record.L_seg)

    def test_parameters_change(self, tiny_bank, tiny_episode):
        net = build_segnet(0)
        before = [p.detach().clone() for p in net.parameters()]

        run_episode(net, tiny_bank.entries[:2], tiny_episode)

        assert any(not torch.equal(a, b) for a, b in zip(before, net.parameters()))

    def test_plain_step_has_no_meta_test(self, tiny_bank, tiny_episode):
        cfg = with_flags(tiny_episode, episodic=False, use_sim=False)

        _, record = run_episode(build_segnet(0), tiny_bank.entries[:2], cfg)

        assert record.version_meta_test == NO_META_TEST
        assert record.lr_test == 0.0
        assert record.L_sim == 0.0

    def test_attached_anchor_variant_runs(self, tiny_bank, tiny_episode):
        cfg = with_flags(tiny_episode, detach_anchor=False)

        _, record = run_episode(build_segnet(0), tiny_bank.entries[:2], cfg)

        assert record.L_sim > 0.0

    def test_empty_batch(self, tiny_episode):
        with pytest.raises(EmptyBankError):
            run_episode(build_segnet(0), [], tiny_episode)


class TestTrain:
    def test_zero_epochs_is_a_no_op(self, tiny_bank, tiny_episode):
        net = build_segnet(0)
        untouched = build_segnet(0)

        trained, report = train(net, tiny_bank, with_flags(tiny_episode, epochs=0))

        assert report.steps == [] and report.epochs == []
        _assert_same_parameters(trained, untouched)

    def test_learning_rate_steps_per_epoch(self, tiny_bank, tiny_episode):
        cfg = with_flags(tiny_episode, epochs=4, batch_size=4, samples_per_subject=1, lr_decay_every=3)

        _, report = train(build_segnet(0), tiny_bank, cfg)

        assert [e.lr_train for e in report.epochs] == pytest.approx([1e-3, 1e-3, 1e-3, 5e-4])
        assert [e.lr_test for e in report.epochs] == pytest.approx([5e-3, 5e-3, 5e-3, 2.5e-3])
        assert [e.steps for e in report.epochs] == [1, 1, 1, 1]

    def test_deterministic(self, tiny_bank, tiny_episode):
        a, report_a = train(build_segnet(0), tiny_bank, tiny_episode)
        b, report_b = train(build_segnet(0), tiny_bank, tiny_episode)

        assert report_a.steps == report_b.steps
        _assert_same_parameters(a, b)

    def test_plain_path_equals_baseline(self, small_split, tiny_episode):
        bank = entries_from_items(small_split.train)
        cfg = with_flags(tiny_episode, episodic=False, use_sim=False, use_ncc=False)

        a, report_a = train(build_segnet(0), bank, cfg)
        b, report_b = train_baseline(build_segnet(0), small_split.train, tiny_episode)

        assert report_a.steps == report_b.steps
        _assert_same_parameters(a, b)

    def test_logs_and_checkpoints(self, tmp_path, tiny_bank, tiny_episode):
        repository = TrainingRunRepository(tmp_path)
        cfg = with_flags(tiny_episode, epochs=2)

        train(build_segnet(0), tiny_bank, cfg, repository=repository)

        assert repository.final_path.exists()
        assert repository.latest_checkpoint() == repository.checkpoint_path(1)
        steps = read_rows(repository.steps_path)
        epochs = read_rows(repository.epochs_path)
        assert len(steps) == 4
        assert [int(row["epoch"]) for row in epochs] == [0, 1]
        assert tuple(epochs[0]) == EPOCH_COLUMNS

    def test_logs_reproduce_byte_for_byte(self, tmp_path, tiny_bank, tiny_episode):
        first = TrainingRunRepository(tmp_path / "a")
        second = TrainingRunRepository(tmp_path / "b")

        train(build_segnet(0), tiny_bank, tiny_episode, repository=first)
        train(build_segnet(0), tiny_bank, tiny_episode, repository=second)

        assert first.steps_path.read_bytes() == second.steps_path.read_bytes()
        assert first.epochs_path.read_bytes() == second.epochs_path.read_bytes()

    def test_resume_matches_uninterrupted_run(self, tmp_path, tiny_bank, tiny_episode):
        full_cfg = with_flags(tiny_episode, epochs=2)
        straight, straight_report = train(build_segnet(0), tiny_bank, full_cfg)

        repository = TrainingRunRepository(tmp_path)
        train(build_segnet(0), tiny_bank, with_flags(tiny_episode, epochs=1), repository=repository)
        resumed, resumed_report = train(
            build_segnet(0),
            tiny_bank,
            full_cfg,
            repository=repository,
            resume_from=repository.checkpoint_path(0),
        )

        assert resumed_report.steps == straight_report.steps
        _assert_same_parameters(resumed, straight)

    def test_resume_rejects_changed_config(self, tmp_path, tiny_bank, tiny_episode):
        repository = TrainingRunRepository(tmp_path)
        train(build_segnet(0), tiny_bank, tiny_episode, repository=repository)

        with pytest.raises(CheckpointMismatchError, match="samples_per_subject"):
            train(
                build_segnet(0),
                tiny_bank,
                with_flags(tiny_episode, epochs=2, samples_per_subject=3),
                resume_from=repository.checkpoint_path(0),
            )

    def test_empty_bank(self, tiny_episode):
        with pytest.raises(EmptyBankError):
            train(build_segnet(0), PseudoModalityBank(entries=()), tiny_episode)
