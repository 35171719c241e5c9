from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from mapdg.core.errors import MapInputError

SIMPLEX_TOLERANCE = 1e-9

Triple = tuple[float, float, float]


class OffSimplexError(MapInputError):
    def __init__(self, values: Sequence[float]) -> None:
        self.values = tuple(float(v) for v in values)
        super().__init__(f"Coefficients {self.values} are not on the probability simplex")


class DirichletParams(BaseModel):
    alpha: Triple = (1.0, 1.0, 1.0)

    model_config = ConfigDict(frozen=True)

    @field_validator("alpha")
    @classmethod
    def _positive(cls, value: Triple) -> Triple:
        if not all(math.isfinite(a) and a > 0.0 for a in value):
            raise ValueError(f"Dirichlet concentrations must be finite and > 0, got {value}")
        return value

    @property
    def total(self) -> float:
        return float(sum(self.alpha))

    @property
    def mean(self) -> np.ndarray:
        return np.asarray(self.alpha, dtype=np.float64) / self.total

    @property
    def variance(self) -> np.ndarray:
        a = np.asarray(self.alpha, dtype=np.float64)
        a0 = self.total
        return a * (a0 - a) / (a0**2 * (a0 + 1.0))

    @property
    def tag(self) -> str:
        return "alpha_" + "_".join(format(a, "g") for a in self.alpha)


def is_on_simplex(values: Sequence[float], tolerance: float = SIMPLEX_TOLERANCE) -> bool:
    if len(values) != 3 or not all(math.isfinite(v) for v in values):
        return False
    return min(values) >= 0.0 and abs(math.fsum(values) - 1.0) <= tolerance


class MixupCoefficients(BaseModel):
    """λ on the 2-simplex; weights x⁰, x² and x³ in that order."""

    lam: Triple

    model_config = ConfigDict(frozen=True)

    @field_validator("lam")
    @classmethod
    def _on_simplex(cls, value: Triple) -> Triple:
        if not is_on_simplex(value):
            raise ValueError(f"λ must be non-negative and sum to 1, got {value}")
        return value

    @classmethod
    def of(cls, values: Sequence[float] | "MixupCoefficients") -> "MixupCoefficients":
        """Coerce, raising OffSimplexError rather than a validation error."""
        if isinstance(values, MixupCoefficients):
            return values
        as_floats = tuple(float(v) for v in values)
        if not is_on_simplex(as_floats):
            raise OffSimplexError(as_floats)
        return cls(lam=as_floats)  # type: ignore[arg-type]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.lam, dtype=np.float64)


class MixupSample(BaseModel):
    image: np.ndarray
    coefficients: MixupCoefficients
    subject_id: int = Field(ge=0)
    sample_index: int = Field(ge=0)
    label: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class DumpConfig(BaseModel):
    """Sample grids exported per concentration vector."""

    alphas: tuple[Triple, ...] = ((5.0, 5.0, 5.0), (1.5, 5.0, 1.5), (1.0, 1.0, 1.0))
    samples: int = Field(default=16, ge=1)
    lambda_draws: int = Field(default=10_000, ge=0)
    grid_columns: int = Field(default=4, ge=1)
    subject_index: int = Field(default=0, ge=0)

    model_config = ConfigDict(frozen=True)

    @field_validator("alphas")
    @classmethod
    def _valid_alphas(cls, value: tuple[Triple, ...]) -> tuple[Triple, ...]:
        for alpha in value:
            DirichletParams(alpha=alpha)
        return value


__all__ = [
    "DirichletParams",
    "DumpConfig",
    "MixupCoefficients",
    "MixupSample",
    "OffSimplexError",
    "SIMPLEX_TOLERANCE",
    "is_on_simplex",
]
