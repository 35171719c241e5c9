"""Episodic meta-train / meta-test loop and the plain baseline trainer."""

from mapdg.domains.meta_trainer.repository import TrainingRunRepository
from mapdg.domains.meta_trainer.schemas import EpisodeConfig, EpisodeReport, EpochRecord, StepRecord
from mapdg.domains.meta_trainer.service import (
    EpisodicTrainer,
    baseline_config,
    entries_from_items,
    run_episode,
    train,
    train_baseline,
    with_flags,
)

__all__ = [
    "EpisodeConfig",
    "EpisodeReport",
    "EpisodicTrainer",
    "EpochRecord",
    "StepRecord",
    "TrainingRunRepository",
    "baseline_config",
    "entries_from_items",
    "run_episode",
    "train",
    "train_baseline",
    "with_flags",
]
