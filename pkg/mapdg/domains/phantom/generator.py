"""Recursive random branching of vessel trees.

Trees grow from one root (an optic-disc analogue near the image centre).
Each segment is a short random walk in heading; at its end the branch splits
into two thinner, shorter children until the width falls under
``min_width`` or ``max_depth`` is reached. Segments are drawn anti-aliased
with sub-pixel coordinates and the coverage is thresholded at 0.5, which
makes the rendering and the label agree by construction.
"""

from __future__ import annotations

import math

import cv2
import numpy as np

from mapdg.core.errors import MapInputError, MapRuntimeError
from mapdg.core.logging import logger
from mapdg.domains.phantom.schemas import BranchingParams, VesselMap

MIN_SIDE = 32
_SHIFT_BITS = 4
_SUBPIXEL = float(1 << _SHIFT_BITS)


class ImageTooSmallError(MapInputError):
    def __init__(self, height: int, width: int) -> None:
        self.height = height
        self.width = width
        super().__init__(f"Image size {height}x{width} is below the {MIN_SIDE}x{MIN_SIDE} minimum for a branching tree")


class VesselDensityError(MapRuntimeError):
    """Raised when no attempt produced a density inside the configured range."""

    def __init__(self, seed: int, attempts: int, densities: list[float], density_range: tuple[float, float]) -> None:
        self.seed = seed
        self.attempts = attempts
        self.densities = densities
        super().__init__(
            f"Vessel density stayed outside {density_range} after {attempts} attempts for seed {seed} "
            f"(last densities: {[round(d, 4) for d in densities[-5:]]})"
        )


def _attempt_rng(seed: int, attempt: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), attempt]))


def _draw_segment(canvas: np.ndarray, start: tuple[float, float], end: tuple[float, float], width: float) -> None:
    p0 = (int(round(start[0] * _SUBPIXEL)), int(round(start[1] * _SUBPIXEL)))
    p1 = (int(round(end[0] * _SUBPIXEL)), int(round(end[1] * _SUBPIXEL)))
    thickness = max(1, int(round(width)))
    cv2.line(canvas, p0, p1, color=255, thickness=thickness, lineType=cv2.LINE_AA, shift=_SHIFT_BITS)


def _grow_tree(rng: np.random.Generator, height: int, width: int, params: BranchingParams) -> np.ndarray:
    canvas = np.zeros((height, width), dtype=np.uint8)
    side = float(min(height, width))
    margin = 0.1 * side

    cx = width / 2.0 + rng.uniform(-params.root_jitter, params.root_jitter) * width
    cy = height / 2.0 + rng.uniform(-params.root_jitter, params.root_jitter) * height
    offset = rng.uniform(0.0, 2.0 * math.pi)

    # (x, y, heading, width, length, depth)
    stack: list[tuple[float, float, float, float, float, int]] = []
    for trunk in range(params.n_trunks):
        heading = offset + 2.0 * math.pi * trunk / params.n_trunks + rng.normal(0.0, 0.2)
        stack.append((cx, cy, heading, params.trunk_width, params.segment_length * side, 0))

    while stack:
        x, y, heading, vessel_width, length, depth = stack.pop()
        step = length / params.steps_per_segment
        left_image = False
        for _ in range(params.steps_per_segment):
            heading += rng.normal(0.0, params.tortuosity)
            nx = x + step * math.cos(heading)
            ny = y + step * math.sin(heading)
            _draw_segment(canvas, (x, y), (nx, ny), vessel_width)
            x, y = nx, ny
            if not (-margin <= x <= width + margin and -margin <= y <= height + margin):
                left_image = True
                break
        if left_image or depth + 1 >= params.max_depth:
            continue
        child_width = vessel_width * params.width_decay
        if child_width < params.min_width:
            continue
        child_length = length * params.length_decay
        for sign in (-1.0, 1.0):
            deflection = sign * rng.uniform(*params.branch_angle)
            stack.append((x, y, heading + deflection, child_width, child_length, depth + 1))

    return canvas


def coverage_to_binary(coverage: np.ndarray) -> np.ndarray:
    """Anti-aliased uint8 coverage to the 0/1 label; 0.5 coverage counts as vessel."""
    return (coverage.astype(np.float32) / 255.0 >= 0.5).astype(np.uint8)


def generate_vessel_map(
    seed: int,
    height: int,
    width: int,
    params: BranchingParams | None = None,
    *,
    subject_id: int = 0,
) -> VesselMap:
    """Deterministic binary vessel tree whose density lies in ``params.density_range``."""
    if height < MIN_SIDE or width < MIN_SIDE:
        raise ImageTooSmallError(height, width)
    params = params or BranchingParams()
    d_min, d_max = params.density_range

    densities: list[float] = []
    for attempt in range(params.max_retries):
        coverage = _grow_tree(_attempt_rng(seed, attempt), height, width, params)
        binary = coverage_to_binary(coverage)
        density = float(binary.mean())
        densities.append(density)
        if d_min <= density <= d_max and binary.any():
            if attempt:
                logger.bind(event="vessel_map", seed=seed, attempts=attempt + 1).debug("Density reached after retries")
            return VesselMap(pixels=binary, subject_id=subject_id)

    raise VesselDensityError(seed, params.max_retries, densities, (d_min, d_max))


__all__ = [
    "ImageTooSmallError",
    "MIN_SIDE",
    "VesselDensityError",
    "coverage_to_binary",
    "generate_vessel_map",
]
