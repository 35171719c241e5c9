from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from pydantic import BaseModel, ConfigDict, Field, field_validator


class LossWeights(BaseModel):
    """Weights of the meta-test objective ω₁·L_seg + ω₂·L_sim + ω₃·L_ncc."""

    seg: float = Field(default=100.0, ge=0.0)
    sim: float = Field(default=100.0, ge=0.0)
    ncc: float = Field(default=1.0, ge=0.0)

    model_config = ConfigDict(frozen=True)

    @field_validator("seg", "sim", "ncc")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("loss weights must be finite")
        return value


@dataclass(frozen=True)
class NccMatrix:
    """Pairwise cosine matrix ``c`` and its same-subject target ``c_star``, rows in FeatureBatch order."""

    c: torch.Tensor
    c_star: torch.Tensor
    subject_ids: tuple[int, ...]
    anchor_flags: tuple[bool, ...]

    def __len__(self) -> int:
        return int(self.c.shape[0])


__all__ = ["LossWeights", "NccMatrix"]
