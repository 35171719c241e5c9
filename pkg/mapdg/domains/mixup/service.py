from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from opentelemetry import trace

from mapdg.core.errors import MapInputError
from mapdg.core.logging import logger
from mapdg.domains.mixup.dirichlet import sample_lambda
from mapdg.domains.mixup.schemas import DirichletParams, MixupCoefficients, MixupSample
from mapdg.domains.pseudomod.schemas import BankEntry

_tracer = trace.get_tracer(__name__)


class EmptyBankError(MapInputError):
    def __init__(self) -> None:
        super().__init__("Cannot draw mixup samples from an empty bank")


class ShapeMismatchError(MapInputError):
    def __init__(self, shapes: Sequence[tuple[int, ...]]) -> None:
        self.shapes = tuple(shapes)
        super().__init__(f"Images to combine have different shapes: {list(self.shapes)}")


def mix_images(
    x0: np.ndarray,
    x2: np.ndarray,
    x3: np.ndarray,
    lam: MixupCoefficients | Sequence[float],
) -> np.ndarray:
    """s = λ₁x⁰ + λ₂x² + λ₃x³, computed in float64 and clipped to [0, 1]."""
    if not (x0.shape == x2.shape == x3.shape):
        raise ShapeMismatchError([x0.shape, x2.shape, x3.shape])
    l1, l2, l3 = MixupCoefficients.of(lam).lam
    combined = l1 * x0.astype(np.float64) + l2 * x2.astype(np.float64) + l3 * x3.astype(np.float64)
    return np.clip(combined, 0.0, 1.0).astype(np.float32)


def mix(entry: BankEntry, lam: MixupCoefficients | Sequence[float], *, sample_index: int = 0) -> MixupSample:
    """One anatomy-preserving style sample; x¹ never enters the mixture."""
    coefficients = MixupCoefficients.of(lam)
    return MixupSample(
        image=mix_images(entry.x0, entry.x2, entry.x3, coefficients),
        coefficients=coefficients,
        subject_id=entry.subject_id,
        sample_index=sample_index,
        label=entry.label,
    )


def draw_meta_test_batch(
    entries: Sequence[BankEntry],
    m: int,
    params: DirichletParams,
    rng: np.random.Generator,
) -> list[MixupSample]:
    """``m`` samples per entry, subject-major, each with its own λ."""
    if not entries:
        raise EmptyBankError()
    if m < 1:
        raise MapInputError(f"Samples per subject must be >= 1, got {m}")

    with _tracer.start_as_current_span(
        "mixup.draw_meta_test_batch", attributes={"mixup.subjects": len(entries), "mixup.m": m}
    ):
        samples = [
            mix(entry, sample_lambda(params, rng), sample_index=index) for entry in entries for index in range(m)
        ]
    logger.bind(event="mixup_batch", subjects=len(entries), samples=len(samples)).trace("Meta-test batch drawn")
    return samples


def tile_grid(images: Sequence[np.ndarray], columns: int) -> np.ndarray:
    """Row-major mosaic of equally sized images; empty cells stay black."""
    if not images:
        raise MapInputError("Nothing to tile")
    shapes = {image.shape for image in images}
    if len(shapes) != 1:
        raise ShapeMismatchError(sorted(shapes))
    height, width = images[0].shape
    columns = min(columns, len(images))
    rows = -(-len(images) // columns)
    grid = np.zeros((rows * height, columns * width), dtype=np.float32)
    for index, image in enumerate(images):
        r, c = divmod(index, columns)
        grid[r * height : (r + 1) * height, c * width : (c + 1) * width] = image
    return grid


__all__ = [
    "EmptyBankError",
    "ShapeMismatchError",
    "draw_meta_test_batch",
    "mix",
    "mix_images",
    "tile_grid",
]
