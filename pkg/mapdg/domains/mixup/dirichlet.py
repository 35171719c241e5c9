"""Dirichlet density and sampling on the 2-simplex.

The density is the standard one, Γ(α₀)/∏Γ(α_i) · ∏ λ_i^(α_i − 1) with
α₀ = Σα_i, taken with respect to Lebesgue measure on (λ₁, λ₂). Samples are
normalised independent Gamma(α_i, 1) draws.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, xlogy

from mapdg.core.errors import MapInputError
from mapdg.domains.mixup.schemas import DirichletParams, MixupCoefficients


def log_normalizer(params: DirichletParams) -> float:
    alpha = np.asarray(params.alpha, dtype=np.float64)
    return float(gammaln(alpha.sum()) - gammaln(alpha).sum())


def dirichlet_logpdf(lam: MixupCoefficients | Sequence[float], params: DirichletParams) -> float:
    coefficients = MixupCoefficients.of(lam)
    alpha = np.asarray(params.alpha, dtype=np.float64)
    return log_normalizer(params) + float(xlogy(alpha - 1.0, coefficients.as_array()).sum())


def dirichlet_pdf(lam: MixupCoefficients | Sequence[float], params: DirichletParams) -> float:
    return float(np.exp(dirichlet_logpdf(lam, params)))


def _normalize(gammas: np.ndarray, params: DirichletParams, rng: np.random.Generator) -> np.ndarray:
    totals = gammas.sum(axis=-1, keepdims=True)
    underflow = totals[..., 0] == 0.0
    if underflow.any():
        # every Gamma draw underflowed (tiny α); the limit law puts mass on a vertex chosen ∝ α
        vertices = rng.choice(3, size=int(underflow.sum()), p=np.asarray(params.alpha) / params.total)
        gammas[underflow] = np.eye(3)[vertices]
        totals = gammas.sum(axis=-1, keepdims=True)
    return gammas / totals


def sample_lambda(params: DirichletParams, rng: np.random.Generator) -> MixupCoefficients:
    draw = _normalize(rng.gamma(np.asarray(params.alpha, dtype=np.float64))[None], params, rng)[0]
    return MixupCoefficients(lam=(float(draw[0]), float(draw[1]), float(draw[2])))


def sample_lambdas(params: DirichletParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` draws as an n×3 float64 array; rows sum to 1."""
    if n < 0:
        raise MapInputError(f"Sample count must be >= 0, got {n}")
    gammas = rng.gamma(np.asarray(params.alpha, dtype=np.float64), size=(n, 3))
    return _normalize(gammas, params, rng)


@dataclass(frozen=True)
class GridHistogram:
    """Empirical versus analytic density on the simplex cells of a regular (λ₁, λ₂) grid."""

    centers: np.ndarray
    empirical: np.ndarray
    expected: np.ndarray
    cell_area: float
    n_samples: int

    def standard_errors(self) -> np.ndarray:
        """Binomial standard error of each empirical density."""
        p = np.clip(self.expected * self.cell_area, 0.0, 1.0)
        return np.sqrt(p * (1.0 - p) / max(self.n_samples, 1)) / self.cell_area


def lambda_grid_histogram(samples: np.ndarray, params: DirichletParams, bins: int = 10) -> GridHistogram:
    """Bin draws over the (λ₁, λ₂) unit square and keep cells lying wholly inside the simplex."""
    if samples.ndim != 2 or samples.shape[1] != 3:
        raise MapInputError(f"Expected an n×3 sample array, got shape {samples.shape}")
    if bins < 2:
        raise MapInputError(f"Need at least 2 bins per axis, got {bins}")

    edges = np.linspace(0.0, 1.0, bins + 1)
    counts, _, _ = np.histogram2d(samples[:, 0], samples[:, 1], bins=(edges, edges))
    width = 1.0 / bins
    area = width * width
    n = samples.shape[0]

    centers: list[tuple[float, float]] = []
    empirical: list[float] = []
    expected: list[float] = []
    for i in range(bins):
        for j in range(bins):
            if i + j + 2 > bins:
                continue
            c1, c2 = (i + 0.5) * width, (j + 0.5) * width
            centers.append((c1, c2))
            empirical.append(counts[i, j] / (n * area) if n else 0.0)
            expected.append(dirichlet_pdf((c1, c2, 1.0 - c1 - c2), params))
    return GridHistogram(
        centers=np.asarray(centers),
        empirical=np.asarray(empirical),
        expected=np.asarray(expected),
        cell_area=area,
        n_samples=n,
    )


__all__ = [
    "GridHistogram",
    "dirichlet_logpdf",
    "dirichlet_pdf",
    "lambda_grid_histogram",
    "log_normalizer",
    "sample_lambda",
    "sample_lambdas",
]
