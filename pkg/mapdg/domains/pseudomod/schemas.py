from __future__ import annotations

from collections.abc import Iterator

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from mapdg.domains.segnet.networks import SYNTHESIS_CHANNELS

PSEUDO_MODALITIES = 4


class SynthesisConfig(BaseModel):
    """Training of the three pseudo-modality synthesis networks."""

    seeds: tuple[int, int, int] = (1, 2, 3)
    epochs: int = Field(default=20, ge=0)
    batch_size: int = Field(default=4, ge=1)
    learning_rate: float = Field(default=1e-3, gt=0.0)
    channels: tuple[int, ...] = SYNTHESIS_CHANNELS
    clahe_clip_limit: float = Field(default=2.0, gt=0.0)
    clahe_tiles: int = Field(default=8, ge=1)

    model_config = ConfigDict(frozen=True)

    @field_validator("seeds")
    @classmethod
    def _distinct(cls, value: tuple[int, int, int]) -> tuple[int, int, int]:
        if len(set(value)) != 3:
            raise ValueError("the three synthesis seeds must be distinct")
        return value


class BankEntry(BaseModel):
    """x⁰…x³ of one subject and its vessel map; every grid shares one H×W."""

    subject_id: int = Field(ge=0)
    x0: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    x3: np.ndarray
    label: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("x0", "x1", "x2", "x3")
    @classmethod
    def _unit_image(cls, value: np.ndarray) -> np.ndarray:
        if value.ndim != 2:
            raise ValueError(f"pseudo-modality images must be 2-D, got shape {value.shape}")
        if not np.isfinite(value).all():
            raise ValueError("pseudo-modality image contains non-finite values")
        if value.min() < 0.0 or value.max() > 1.0:
            raise ValueError("pseudo-modality intensities must lie in [0, 1]")
        return value.astype(np.float32, copy=False)

    @field_validator("label")
    @classmethod
    def _binary(cls, value: np.ndarray) -> np.ndarray:
        if not np.isin(value, (0, 1)).all():
            raise ValueError("label must be binary")
        return value.astype(np.uint8, copy=False)

    @model_validator(mode="after")
    def _same_grid(self) -> "BankEntry":
        shapes = {self.x0.shape, self.x1.shape, self.x2.shape, self.x3.shape, self.label.shape}
        if len(shapes) != 1:
            raise ValueError(f"bank grids disagree in shape: {sorted(shapes)}")
        return self

    @property
    def shape(self) -> tuple[int, int]:
        return int(self.x0.shape[0]), int(self.x0.shape[1])

    def modality(self, k: int) -> np.ndarray:
        if not 0 <= k < PSEUDO_MODALITIES:
            raise IndexError(f"pseudo-modality index must be in [0, {PSEUDO_MODALITIES}), got {k}")
        return (self.x0, self.x1, self.x2, self.x3)[k]


class PseudoModalityBank(BaseModel):
    entries: tuple[BankEntry, ...]

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @model_validator(mode="after")
    def _unique_subjects(self) -> "PseudoModalityBank":
        ids = [entry.subject_id for entry in self.entries]
        if len(ids) != len(set(ids)):
            raise ValueError("each subject may appear only once in a bank")
        return self

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[BankEntry]:  # type: ignore[override]
        return iter(self.entries)

    @property
    def subject_ids(self) -> list[int]:
        return [entry.subject_id for entry in self.entries]


__all__ = ["BankEntry", "PSEUDO_MODALITIES", "PseudoModalityBank", "SynthesisConfig"]
