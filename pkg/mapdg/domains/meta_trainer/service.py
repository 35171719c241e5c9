"""Episodic meta-training of the segmentation network.

Each episode runs two sequential first-order stages on one subject batch:

1. meta-train: L_seg on x¹, step of the η_train optimizer; the pooled
   features of this pass become the subjects' anchors;
2. meta-test: M Dirichlet mixups of (x⁰, x², x³) per subject through the
   updated network, ω₁L_seg + ω₂L_sim + ω₃L_ncc, step of the η_test optimizer.

With ``episodic=False`` a single η_train optimizer minimises ω₁L_seg on x⁰
(plus ω₃L_ncc over x⁰ anchors and M mixup views when NCC is active); this
is the baseline path.
"""

from __future__ import annotations

import json
import math
import time
from collections.abc import Sequence
from pathlib import Path
from typing import Any

import numpy as np
import torch
from opentelemetry import trace
from torch.optim.lr_scheduler import StepLR

from mapdg.core.context import update_run_context
from mapdg.core.logging import logger
from mapdg.core.seeding import component_rng
from mapdg.domains.losses.functional import (
    NonFiniteLossError,
    meta_test_loss,
    ncc_loss,
    ncc_matrix,
    seg_loss,
    sim_loss_batch,
)
from mapdg.domains.meta_trainer.repository import SEGNET_KIND, TrainingRunRepository
from mapdg.domains.meta_trainer.schemas import (
    NO_META_TEST,
    EpisodeConfig,
    EpisodeReport,
    EpochRecord,
    StepRecord,
)
from mapdg.domains.mixup.service import EmptyBankError, draw_meta_test_batch
from mapdg.domains.phantom.schemas import PhantomItem
from mapdg.domains.pseudomod.schemas import BankEntry, PseudoModalityBank
from mapdg.domains.pseudomod.service import source_input
from mapdg.domains.segnet.checkpoint import CheckpointMismatchError, load_checkpoint, save_checkpoint
from mapdg.domains.segnet.networks import SegNet
from mapdg.domains.segnet.schemas import FeatureBatch

_LOSS_FIELDS = ("L_seg_train", "L_seg", "L_sim", "L_ncc", "L_test")


def _images(arrays: Sequence[np.ndarray]) -> torch.Tensor:
    return torch.from_numpy(np.stack(arrays).astype(np.float32, copy=False))[:, None]


def _labels(arrays: Sequence[np.ndarray]) -> torch.Tensor:
    return torch.from_numpy(np.stack(arrays).astype(np.int64))


def _checked(name: str, value: torch.Tensor, context: str) -> float:
    as_float = float(value.detach())
    if not math.isfinite(as_float):
        raise NonFiniteLossError(name, as_float, context=context)
    return as_float


def _anchor_batch(subject_ids: Sequence[int], vectors: torch.Tensor) -> FeatureBatch:
    return FeatureBatch(
        vectors=vectors,
        subject_ids=tuple(subject_ids),
        anchor_flags=(True,) * len(subject_ids),
        sample_index=(-1,) * len(subject_ids),
    )


def with_flags(cfg: EpisodeConfig, **flags: Any) -> EpisodeConfig:
    """Validated copy of ``cfg`` with fields replaced."""
    return EpisodeConfig.model_validate({**cfg.model_dump(), **flags})


def entries_from_items(items: Sequence[PhantomItem]) -> PseudoModalityBank:
    """A raw split as a degenerate bank whose four pseudo-modalities are all x⁰."""
    entries = []
    for item in items:
        x0 = source_input(item)
        entries.append(BankEntry(subject_id=item.subject_id, x0=x0, x1=x0, x2=x0, x3=x0, label=item.vessel_map.pixels))
    return PseudoModalityBank(entries=tuple(entries))


class EpisodicTrainer:
    """Owns the optimizers, schedulers and RNG streams of one training run."""

    def __init__(
        self,
        net: SegNet,
        cfg: EpisodeConfig,
        repository: TrainingRunRepository | None = None,
    ) -> None:
        self._net = net
        self._cfg = cfg
        self._repository = repository
        self._tracer = trace.get_tracer(self.__class__.__module__)
        self._shuffle_rng = component_rng(cfg.seed, "episode.shuffle")
        self._mixup_rng = component_rng(cfg.seed, "episode.mixup")

        self._opt_train = torch.optim.Adam(net.parameters(), lr=cfg.lr_train)
        self._sched_train = StepLR(self._opt_train, step_size=cfg.lr_decay_every, gamma=cfg.lr_decay)
        self._opt_test: torch.optim.Adam | None = None
        self._sched_test: StepLR | None = None
        if cfg.episodic:
            self._opt_test = torch.optim.Adam(net.parameters(), lr=cfg.lr_test)
            self._sched_test = StepLR(self._opt_test, step_size=cfg.lr_decay_every, gamma=cfg.lr_decay)

        self._version = 0
        self._step = 0
        self._epoch = 0
        self.report = EpisodeReport()

    @property
    def net(self) -> SegNet:
        return self._net

    @property
    def config(self) -> EpisodeConfig:
        return self._cfg

    @property
    def epoch(self) -> int:
        return self._epoch

    @property
    def version(self) -> int:
        """Number of optimizer steps applied so far."""
        return self._version

    def current_lrs(self) -> tuple[float, float]:
        lr_train = float(self._opt_train.param_groups[0]["lr"])
        lr_test = float(self._opt_test.param_groups[0]["lr"]) if self._opt_test else 0.0
        return lr_train, lr_test

    def run_episode(self, entries: Sequence[BankEntry]) -> StepRecord:
        if not entries:
            raise EmptyBankError()
        self._net.train()
        if self._cfg.episodic:
            record = self._episodic_step(entries)
        else:
            record = self._plain_step(entries)
        self._step += 1
        self.report.steps.append(record)
        return record

    def _episodic_step(self, entries: Sequence[BankEntry]) -> StepRecord:
        cfg = self._cfg
        weights = cfg.effective_weights
        where = f"epoch {self._epoch}, step {self._step}"
        subject_ids = [entry.subject_id for entry in entries]
        lr_train, lr_test = self.current_lrs()
        assert self._opt_test is not None

        update_run_context(stage="meta-train")
        x1 = _images([entry.x1 for entry in entries])
        y = _labels([entry.label for entry in entries])
        version_meta_train = self._version
        train_out = self._net(x1)
        train_loss = seg_loss(train_out.logits, y)
        l_seg_train = _checked("L_seg (meta-train)", train_loss, where)
        anchors = train_out.z.detach()
        self._opt_train.zero_grad(set_to_none=True)
        train_loss.backward()
        self._opt_train.step()
        self._version += 1

        update_run_context(stage="meta-test")
        samples = draw_meta_test_batch(entries, cfg.samples_per_subject, cfg.dirichlet, self._mixup_rng)
        version_meta_test = self._version
        test_out = self._net(_images([s.image for s in samples]))
        l_seg = seg_loss(test_out.logits, _labels([s.label for s in samples]))
        if not cfg.detach_anchor:
            anchors = self._net(x1).z

        sample_batch = FeatureBatch(
            vectors=test_out.z,
            subject_ids=tuple(s.subject_id for s in samples),
            anchor_flags=(False,) * len(samples),
            sample_index=tuple(s.sample_index for s in samples),
        )
        zero = l_seg.new_zeros(())
        l_sim = (
            sim_loss_batch({sid: anchors[i] for i, sid in enumerate(subject_ids)}, sample_batch)
            if cfg.sim_active
            else zero
        )
        l_ncc = (
            ncc_loss(ncc_matrix(FeatureBatch.concat([_anchor_batch(subject_ids, anchors), sample_batch])))
            if cfg.ncc_active
            else zero
        )
        seg_value = _checked("L_seg", l_seg, where)
        sim_value = _checked("L_sim", l_sim, where)
        ncc_value = _checked("L_ncc", l_ncc, where)
        total = meta_test_loss(l_seg, l_sim, l_ncc, weights)
        self._opt_test.zero_grad(set_to_none=True)
        total.backward()
        self._opt_test.step()
        self._version += 1

        return StepRecord(
            step=self._step,
            epoch=self._epoch,
            lr_train=lr_train,
            lr_test=lr_test,
            L_seg_train=l_seg_train,
            L_seg=seg_value,
            L_sim=sim_value,
            L_ncc=ncc_value,
            L_test=meta_test_loss(seg_value, sim_value, ncc_value, weights),
            version_meta_train=version_meta_train,
            version_meta_test=version_meta_test,
        )

    def _plain_step(self, entries: Sequence[BankEntry]) -> StepRecord:
        cfg = self._cfg
        weights = cfg.effective_weights
        where = f"epoch {self._epoch}, step {self._step}"
        subject_ids = [entry.subject_id for entry in entries]
        lr_train, lr_test = self.current_lrs()

        update_run_context(stage="train")
        version_meta_train = self._version
        out = self._net(_images([entry.x0 for entry in entries]))
        l_seg = seg_loss(out.logits, _labels([entry.label for entry in entries]))
        l_ncc = l_seg.new_zeros(())
        if cfg.ncc_active:
            samples = draw_meta_test_batch(entries, cfg.samples_per_subject, cfg.dirichlet, self._mixup_rng)
            views = self._net(_images([s.image for s in samples])).z
            view_batch = FeatureBatch(
                vectors=views,
                subject_ids=tuple(s.subject_id for s in samples),
                anchor_flags=(False,) * len(samples),
                sample_index=tuple(s.sample_index for s in samples),
            )
            l_ncc = ncc_loss(ncc_matrix(FeatureBatch.concat([_anchor_batch(subject_ids, out.z), view_batch])))
        seg_value = _checked("L_seg", l_seg, where)
        ncc_value = _checked("L_ncc", l_ncc, where)
        total = weights.seg * l_seg + weights.ncc * l_ncc if cfg.ncc_active else weights.seg * l_seg
        self._opt_train.zero_grad(set_to_none=True)
        total.backward()
        self._opt_train.step()
        self._version += 1

        return StepRecord(
            step=self._step,
            epoch=self._epoch,
            lr_train=lr_train,
            lr_test=lr_test,
            L_seg_train=seg_value,
            L_seg=seg_value,
            L_sim=0.0,
            L_ncc=ncc_value,
            L_test=meta_test_loss(seg_value, 0.0, ncc_value, weights),
            version_meta_train=version_meta_train,
            version_meta_test=NO_META_TEST,
        )

    def run_epoch(self, bank: PseudoModalityBank) -> EpochRecord:
        if not len(bank):
            raise EmptyBankError()
        update_run_context(epoch=self._epoch)
        started = time.perf_counter()
        lr_train, lr_test = self.current_lrs()
        order = self._shuffle_rng.permutation(len(bank))
        entries = bank.entries
        steps: list[StepRecord] = []
        for start in range(0, len(order), self._cfg.batch_size):
            batch = [entries[int(i)] for i in order[start : start + self._cfg.batch_size]]
            steps.append(self.run_episode(batch))

        self._sched_train.step()
        if self._sched_test is not None:
            self._sched_test.step()

        means = {name: float(np.mean([getattr(s, name) for s in steps])) for name in _LOSS_FIELDS}
        record = EpochRecord(
            epoch=self._epoch,
            steps=len(steps),
            lr_train=lr_train,
            lr_test=lr_test,
            wall_time=time.perf_counter() - started,
            **means,
        )
        self.report.epochs.append(record)
        self._epoch += 1
        logger.bind(event="epoch", **record.model_dump()).info("Epoch finished")
        return record

    def fit(self, bank: PseudoModalityBank) -> EpisodeReport:
        """Run the remaining epochs up to ``cfg.epochs``, checkpointing after each."""
        with self._tracer.start_as_current_span(
            "EpisodicTrainer.fit",
            attributes={
                "episode.epochs": self._cfg.epochs,
                "episode.start_epoch": self._epoch,
                "episode.subjects": len(bank),
                "episode.episodic": self._cfg.episodic,
            },
        ):
            while self._epoch < self._cfg.epochs:
                self.run_epoch(bank)
                if self._repository is not None:
                    self.report.checkpoint = str(self.save(self._repository.checkpoint_path(self._epoch - 1)))
                    self._repository.write_logs(self.report)
            if self._repository is not None:
                save_checkpoint(
                    self._repository.final_path,
                    self._net,
                    kind=SEGNET_KIND,
                    config=self._cfg.model_dump(mode="json"),
                )
                self._repository.write_logs(self.report)
                self.report.checkpoint = str(self._repository.final_path)
        self._net.eval()
        return self.report

    def resume_state(self) -> dict[str, Any]:
        return {
            "epoch": self._epoch,
            "step": self._step,
            "version": self._version,
            "opt_train": self._opt_train.state_dict(),
            "sched_train": self._sched_train.state_dict(),
            "opt_test": self._opt_test.state_dict() if self._opt_test else {},
            "sched_test": self._sched_test.state_dict() if self._sched_test else {},
            "shuffle_rng": json.dumps(self._shuffle_rng.bit_generator.state),
            "mixup_rng": json.dumps(self._mixup_rng.bit_generator.state),
            "report": self.report.model_dump_json(),
        }

    def save(self, path: Path) -> Path:
        return save_checkpoint(
            path,
            self._net,
            kind=SEGNET_KIND,
            config=self._cfg.model_dump(mode="json"),
            resume_state=self.resume_state(),
        )

    def load(self, path: Path) -> None:
        """Restore parameters, optimizer, scheduler and RNG state from an epoch checkpoint."""
        payload = load_checkpoint(path, self._net, kind=SEGNET_KIND)
        stored = {k: v for k, v in payload["config"].items() if k != "epochs"}
        current = {k: v for k, v in self._cfg.model_dump(mode="json").items() if k != "epochs"}
        if stored != current:
            changed = sorted(k for k in current if stored.get(k) != current[k])
            raise CheckpointMismatchError(path, f"training configuration differs in {changed}")
        state = payload["resume"]
        if not state:
            raise CheckpointMismatchError(path, "holds no resume state")
        self._opt_train.load_state_dict(state["opt_train"])
        self._sched_train.load_state_dict(state["sched_train"])
        if self._opt_test is not None and self._sched_test is not None:
            self._opt_test.load_state_dict(state["opt_test"])
            self._sched_test.load_state_dict(state["sched_test"])
        self._shuffle_rng.bit_generator.state = json.loads(state["shuffle_rng"])
        self._mixup_rng.bit_generator.state = json.loads(state["mixup_rng"])
        self._epoch = int(state["epoch"])
        self._step = int(state["step"])
        self._version = int(state["version"])
        self.report = EpisodeReport.model_validate_json(state["report"])
        logger.bind(event="resume", path=str(path), epoch=self._epoch).info("Training resumed")


def run_episode(net: SegNet, entries: Sequence[BankEntry], cfg: EpisodeConfig) -> tuple[SegNet, StepRecord]:
    """A single episode with fresh optimizers; for inspection and tests."""
    trainer = EpisodicTrainer(net, cfg)
    return trainer.net, trainer.run_episode(entries)


def train(
    net: SegNet,
    bank: PseudoModalityBank,
    cfg: EpisodeConfig,
    *,
    repository: TrainingRunRepository | None = None,
    resume_from: Path | None = None,
) -> tuple[SegNet, EpisodeReport]:
    if not len(bank):
        raise EmptyBankError()
    trainer = EpisodicTrainer(net, cfg, repository)
    if resume_from is not None:
        trainer.load(resume_from)
    report = trainer.fit(bank)
    logger.bind(event="train", epochs=len(report.epochs), steps=len(report.steps)).info("Training finished")
    return trainer.net, report


def baseline_config(cfg: EpisodeConfig) -> EpisodeConfig:
    return with_flags(cfg, episodic=False, use_sim=False, use_ncc=False)


def train_baseline(
    net: SegNet,
    data: PseudoModalityBank | Sequence[PhantomItem],
    cfg: EpisodeConfig,
    *,
    repository: TrainingRunRepository | None = None,
) -> tuple[SegNet, EpisodeReport]:
    """Plain supervised L_seg training on x⁰: the non-episodic path with every extra term off."""
    bank = data if isinstance(data, PseudoModalityBank) else entries_from_items(data)
    return train(net, bank, baseline_config(cfg), repository=repository)


__all__ = [
    "EpisodicTrainer",
    "baseline_config",
    "entries_from_items",
    "run_episode",
    "train",
    "train_baseline",
    "with_flags",
]
