from __future__ import annotations

import math

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from mapdg.domains.losses.schemas import LossWeights
from mapdg.domains.mixup.schemas import DirichletParams, Triple

NO_META_TEST = -1


class EpisodeConfig(BaseModel):
    """Episodic meta-training settings; the TOML ``[episode]`` section mirrors it field for field."""

    batch_size: int = Field(default=10, ge=1)
    epochs: int = Field(default=30, ge=0)
    lr_train: float = Field(default=1e-3, gt=0.0)
    lr_test: float = Field(default=5e-3, gt=0.0)
    lr_decay: float = Field(default=0.5, gt=0.0, le=1.0)
    lr_decay_every: int = Field(default=3, ge=1)
    weights: LossWeights = LossWeights()
    alpha: Triple = (1.0, 1.0, 1.0)
    samples_per_subject: int = Field(default=3, ge=1)
    seed: int = 0
    detach_anchor: bool = True
    lookahead: bool = False
    episodic: bool = True
    use_sim: bool = True
    use_ncc: bool = True

    model_config = ConfigDict(frozen=True)

    @field_validator("alpha")
    @classmethod
    def _valid_alpha(cls, value: Triple) -> Triple:
        DirichletParams(alpha=value)
        return value

    @model_validator(mode="after")
    def _supported(self) -> "EpisodeConfig":
        if self.lookahead:
            raise ValueError("lookahead (discarding the meta-train update) is reserved and not supported")
        if self.use_sim and not self.episodic:
            raise ValueError("L_sim needs meta-train anchors and is only available with episodic training")
        return self

    @property
    def dirichlet(self) -> DirichletParams:
        return DirichletParams(alpha=self.alpha)

    @property
    def sim_active(self) -> bool:
        return self.episodic and self.use_sim and self.weights.sim > 0.0

    @property
    def ncc_active(self) -> bool:
        return self.use_ncc and self.weights.ncc > 0.0

    @property
    def effective_weights(self) -> LossWeights:
        """Weights with switched-off terms set to zero."""
        return LossWeights(
            seg=self.weights.seg,
            sim=self.weights.sim if self.sim_active else 0.0,
            ncc=self.weights.ncc if self.ncc_active else 0.0,
        )

    def learning_rate(self, base: float, epoch: int) -> float:
        return base * self.lr_decay ** (epoch // self.lr_decay_every)


class StepRecord(BaseModel):
    """One episode. ``version_*`` count optimizer steps applied before each forward pass."""

    step: int = Field(ge=0)
    epoch: int = Field(ge=0)
    lr_train: float
    lr_test: float
    L_seg_train: float
    L_seg: float
    L_sim: float
    L_ncc: float
    L_test: float
    version_meta_train: int = Field(ge=0)
    version_meta_test: int = Field(ge=NO_META_TEST)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _finite(self) -> "StepRecord":
        for name in ("lr_train", "lr_test", "L_seg_train", "L_seg", "L_sim", "L_ncc", "L_test"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        return self


class EpochRecord(BaseModel):
    epoch: int = Field(ge=0)
    steps: int = Field(ge=0)
    lr_train: float
    lr_test: float
    L_seg_train: float
    L_seg: float
    L_sim: float
    L_ncc: float
    L_test: float
    wall_time: float = Field(ge=0.0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _finite(self) -> "EpochRecord":
        for name in ("lr_train", "lr_test", "L_seg_train", "L_seg", "L_sim", "L_ncc", "L_test", "wall_time"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        return self


class EpisodeReport(BaseModel):
    epochs: list[EpochRecord] = Field(default_factory=list)
    steps: list[StepRecord] = Field(default_factory=list)
    checkpoint: str | None = None

    def loss_sequence(self, name: str = "L_seg_train") -> list[float]:
        return [getattr(step, name) for step in self.steps]


STEP_COLUMNS: tuple[str, ...] = tuple(StepRecord.model_fields)
# wall time stays out of the CSV so reruns reproduce the log byte for byte
EPOCH_COLUMNS: tuple[str, ...] = tuple(name for name in EpochRecord.model_fields if name != "wall_time")


__all__ = [
    "EPOCH_COLUMNS",
    "EpisodeConfig",
    "EpisodeReport",
    "EpochRecord",
    "NO_META_TEST",
    "STEP_COLUMNS",
    "StepRecord",
]
