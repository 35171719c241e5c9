from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field, model_validator

SHIFT_ORDER: tuple[str, ...] = ("I", "II", "III")


class EvaluationConfig(BaseModel):
    threshold: float = Field(default=0.5, gt=0.0, lt=1.0)
    oracle: bool = True
    oracle_subjects: int = Field(default=20, ge=1)
    dump_predictions: bool = False
    probe_epochs: int = Field(default=15, ge=0)
    probe_threshold: float = Field(default=0.5, ge=0.0, le=1.0)
    diversity_floor: float = Field(default=0.01, ge=0.0)

    model_config = ConfigDict(frozen=True)


class MetricRecord(BaseModel):
    subject_id: int = Field(ge=0)
    domain: str
    shift_type: str
    dice: float = Field(ge=0.0, le=1.0)
    threshold: float

    model_config = ConfigDict(frozen=True)


class AblationFlags(BaseModel):
    episodic: bool
    use_sim: bool
    use_ncc: bool

    model_config = ConfigDict(frozen=True)

    @property
    def label(self) -> str:
        return "/".join(
            name if flag else "-"
            for name, flag in (("epi", self.episodic), ("sim", self.use_sim), ("ncc", self.use_ncc))
        )


class AblationCell(BaseModel):
    flags: AblationFlags
    per_shift: dict[str, float]
    overall: float
    per_seed: list[float] = Field(default_factory=list)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _in_unit_range(self) -> "AblationCell":
        for value in (*self.per_shift.values(), self.overall, *self.per_seed):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"Dice aggregates must lie in [0, 1], got {value}")
        return self


class AblationConfig(BaseModel):
    seeds: tuple[int, ...] = (0, 1, 2)
    epochs: int = Field(default=10, ge=0)

    model_config = ConfigDict(frozen=True)


class ComparisonRow(BaseModel):
    method: str
    domain: str
    shift_type: str
    mean_dice: float
    subjects: int

    model_config = ConfigDict(frozen=True)


class ProbeReport(BaseModel):
    """Dice of a D⁰-trained probe on the pseudo-modalities of the same subjects."""

    per_modality: dict[int, float]
    threshold: float
    diversity: float
    diversity_floor: float

    model_config = ConfigDict(frozen=True)

    @property
    def mean(self) -> float:
        return sum(self.per_modality.values()) / len(self.per_modality)

    @property
    def consistent(self) -> bool:
        return min(self.per_modality.values()) >= self.threshold

    @property
    def diverse(self) -> bool:
        return self.diversity > self.diversity_floor


__all__ = [
    "AblationCell",
    "AblationConfig",
    "AblationFlags",
    "ComparisonRow",
    "EvaluationConfig",
    "MetricRecord",
    "ProbeReport",
    "SHIFT_ORDER",
]
