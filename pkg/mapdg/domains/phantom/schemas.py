from __future__ import annotations

import math
from enum import StrEnum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

FloatRange = tuple[float, float]
IntRange = tuple[int, int]


class Polarity(StrEnum):
    BRIGHT = "bright"
    DARK = "dark"


class Modality(StrEnum):
    FUNDUS = "fundus"
    OCTA = "octa"
    FA = "fa"


class ShiftType(StrEnum):
    SOURCE = "source"
    PATHOLOGY = "I"
    CROSS_SITE = "II"
    CROSS_MODALITY = "III"
    IDENTITY = "identity"


class Split(StrEnum):
    TRAIN = "train"
    TEST = "test"


def _check_range(name: str, bounds: tuple[float, float], *, lower: float | None = None) -> None:
    lo, hi = bounds
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError(f"{name} bounds must be finite, got {bounds}")
    if lo > hi:
        raise ValueError(f"{name} lower bound exceeds upper bound: {bounds}")
    if lower is not None and lo < lower:
        raise ValueError(f"{name} must be >= {lower}, got {bounds}")


class StyleFamily(BaseModel):
    """Parameter ranges of one rendering style; a rendering samples each range uniformly."""

    name: str = Field(min_length=1, pattern=r"^[a-z0-9_]+$")
    polarity: Polarity
    modality: Modality
    shift_type: ShiftType
    gamma: FloatRange = (1.0, 1.0)
    noise_sigma: FloatRange = (0.0, 0.0)
    blur_radius: FloatRange = (0.0, 0.0)
    gradient_amplitude: FloatRange = (0.0, 0.0)
    background: FloatRange = (0.0, 0.0)
    contrast: FloatRange = (1.0, 1.0)
    lesion_count: IntRange = (0, 0)
    lesion_radius: FloatRange = Field(default=(0.03, 0.08), description="Fraction of the shorter image side")
    lesion_intensity: FloatRange = (0.0, 0.0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _ranges_are_intervals(self) -> "StyleFamily":
        _check_range("gamma", self.gamma)
        if self.gamma[0] <= 0:
            raise ValueError("gamma must be positive")
        _check_range("noise_sigma", self.noise_sigma, lower=0.0)
        _check_range("blur_radius", self.blur_radius, lower=0.0)
        _check_range("gradient_amplitude", self.gradient_amplitude, lower=0.0)
        _check_range("background", self.background, lower=0.0)
        _check_range("contrast", self.contrast)
        if self.contrast[0] <= 0:
            raise ValueError("contrast must be positive so vessels stay detectable")
        _check_range("lesion_count", (float(self.lesion_count[0]), float(self.lesion_count[1])), lower=0.0)
        _check_range("lesion_radius", self.lesion_radius, lower=0.0)
        _check_range("lesion_intensity", self.lesion_intensity)
        return self

    @property
    def needs_preprocessing(self) -> bool:
        """Fundus-like renderings go through the D0 conversion before segmentation."""
        return self.modality is Modality.FUNDUS


class BranchingParams(BaseModel):
    """Knobs of the recursive vessel-tree generator. Lengths are fractions of the shorter side."""

    n_trunks: int = Field(default=3, ge=1, le=6)
    trunk_width: float = Field(default=3.0, ge=1.0, le=8.0)
    width_decay: float = Field(default=0.72, ge=0.3, le=0.95)
    min_width: float = Field(default=0.8, ge=0.5, le=4.0)
    segment_length: float = Field(default=0.30, ge=0.05, le=1.0)
    length_decay: float = Field(default=0.78, ge=0.3, le=1.0)
    branch_angle: FloatRange = Field(default=(0.35, 0.80), description="Child deflection range in radians")
    tortuosity: float = Field(default=0.15, ge=0.0, le=1.0)
    max_depth: int = Field(default=5, ge=1, le=8)
    steps_per_segment: int = Field(default=8, ge=1, le=64)
    root_jitter: float = Field(default=0.15, ge=0.0, le=0.45)
    density_range: FloatRange = Field(default=(0.04, 0.30))
    max_retries: int = Field(default=25, ge=1, le=1000)

    model_config = ConfigDict(frozen=True)

    @field_validator("branch_angle")
    @classmethod
    def _angle_interval(cls, value: FloatRange) -> FloatRange:
        _check_range("branch_angle", value, lower=0.0)
        if value[1] > math.pi / 2:
            raise ValueError("branch_angle upper bound must not exceed pi/2")
        return value

    @field_validator("density_range")
    @classmethod
    def _density_interval(cls, value: FloatRange) -> FloatRange:
        _check_range("density_range", value, lower=0.0)
        if value[1] > 1.0 or value[1] <= 0.0:
            raise ValueError("density_range must lie inside (0, 1]")
        return value


class VesselMap(BaseModel):
    """Binary anatomy of one subject (1 = vessel)."""

    pixels: np.ndarray
    subject_id: int = Field(ge=0)

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("pixels")
    @classmethod
    def _binary_grid(cls, value: np.ndarray) -> np.ndarray:
        if value.ndim != 2:
            raise ValueError(f"vessel map must be 2-D, got shape {value.shape}")
        if not np.isin(value, (0, 1)).all():
            raise ValueError("vessel map values must be exactly 0 or 1")
        if not value.any():
            raise ValueError("vessel map has no vessel pixels")
        return value.astype(np.uint8, copy=False)

    @property
    def shape(self) -> tuple[int, int]:
        return int(self.pixels.shape[0]), int(self.pixels.shape[1])

    @property
    def density(self) -> float:
        return float(self.pixels.mean())


class StyleRendering(BaseModel):
    """One grayscale image of a subject under one style family."""

    image: np.ndarray
    style: str
    subject_id: int = Field(ge=0)

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("image")
    @classmethod
    def _unit_grid(cls, value: np.ndarray) -> np.ndarray:
        if value.ndim != 2:
            raise ValueError(f"rendering must be 2-D, got shape {value.shape}")
        if not np.isfinite(value).all():
            raise ValueError("rendering contains non-finite intensities")
        if value.min() < 0.0 or value.max() > 1.0:
            raise ValueError("rendering intensities must lie in [0, 1]")
        return value.astype(np.float32, copy=False)


class PhantomItem(BaseModel):
    """A (rendering, anatomy) pair as handed to training and evaluation."""

    subject_id: int = Field(ge=0)
    split: Split
    family: StyleFamily
    vessel_map: VesselMap
    rendering: StyleRendering

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @model_validator(mode="after")
    def _consistent(self) -> "PhantomItem":
        if self.rendering.image.shape != self.vessel_map.pixels.shape:
            raise ValueError(
                f"rendering shape {self.rendering.image.shape} differs from vessel map {self.vessel_map.pixels.shape}"
            )
        if not (self.subject_id == self.vessel_map.subject_id == self.rendering.subject_id):
            raise ValueError("subject ids of item, map and rendering disagree")
        if self.rendering.style != self.family.name:
            raise ValueError("rendering style does not match the item's family")
        return self


class DatasetSplit(BaseModel):
    train: tuple[PhantomItem, ...]
    test: tuple[PhantomItem, ...]
    source_families: tuple[StyleFamily, ...]
    target_families: tuple[StyleFamily, ...]
    seed: int

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def train_subjects(self) -> list[int]:
        return sorted({item.subject_id for item in self.train})

    @property
    def test_subjects(self) -> list[int]:
        return sorted({item.subject_id for item in self.test})

    def test_items(self, family: str) -> list[PhantomItem]:
        return [item for item in self.test if item.family.name == family]


class DataConfig(BaseModel):
    """Dataset generation; families are referenced by registry name."""

    n_subjects: int = Field(default=20, ge=1)
    n_test: int = Field(default=12, ge=0)
    size: tuple[int, int] = (128, 128)
    source_families: tuple[str, ...] = ("fundus_sharp", "fundus_hazy", "fundus_bright")
    target_families: tuple[str, ...] = ("fundus_lesion", "fundus_low_contrast", "octa_like")
    params: BranchingParams = BranchingParams()

    model_config = ConfigDict(frozen=True)


__all__ = [
    "BranchingParams",
    "DataConfig",
    "DatasetSplit",
    "Modality",
    "PhantomItem",
    "Polarity",
    "ShiftType",
    "Split",
    "StyleFamily",
    "StyleRendering",
    "VesselMap",
]
