from __future__ import annotations

import math
import zlib

import cv2
import numpy as np

from mapdg.domains.phantom.schemas import Polarity, StyleFamily, StyleRendering, VesselMap

DEFAULT_CONTRAST_MARGIN = 0.1


def _render_rng(seed: int, subject_id: int, family: StyleFamily) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(subject_id), zlib.crc32(family.name.encode())]))


def _gradient_field(rng: np.random.Generator, height: int, width: int) -> np.ndarray:
    theta = rng.uniform(0.0, 2.0 * math.pi)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    ramp = xx * math.cos(theta) + yy * math.sin(theta)
    span = ramp.max() - ramp.min()
    return (ramp - ramp.min()) / span - 0.5 if span > 0 else np.zeros_like(ramp)


def _lesion_field(rng: np.random.Generator, height: int, width: int, family: StyleFamily) -> np.ndarray:
    field = np.zeros((height, width), dtype=np.float64)
    count = int(rng.integers(family.lesion_count[0], family.lesion_count[1] + 1))
    side = min(height, width)
    for _ in range(count):
        center = (int(rng.integers(0, width)), int(rng.integers(0, height)))
        axes = (
            max(1, int(round(rng.uniform(*family.lesion_radius) * side))),
            max(1, int(round(rng.uniform(*family.lesion_radius) * side))),
        )
        angle = float(rng.uniform(0.0, 180.0))
        intensity = float(rng.uniform(*family.lesion_intensity))
        blob = np.zeros((height, width), dtype=np.float32)
        cv2.ellipse(blob, center, axes, angle, 0.0, 360.0, color=1.0, thickness=-1)
        blob = cv2.GaussianBlur(blob, (0, 0), sigmaX=max(axes) / 3.0, borderType=cv2.BORDER_REFLECT)
        field += intensity * blob
    return field


def render(vessel_map: VesselMap, family: StyleFamily, seed: int) -> StyleRendering:
    """Render one subject under one style family.

    Order of operations: blur the binary map, map it to background plus
    contrast, add the illumination ramp and lesion blobs, apply gamma, flip
    polarity, add noise, clip to [0, 1].
    """
    rng = _render_rng(seed, vessel_map.subject_id, family)
    height, width = vessel_map.shape

    image = vessel_map.pixels.astype(np.float64)
    blur = rng.uniform(*family.blur_radius)
    if blur > 0:
        image = cv2.GaussianBlur(image, (0, 0), sigmaX=blur, borderType=cv2.BORDER_REFLECT)

    background = rng.uniform(*family.background)
    contrast = rng.uniform(*family.contrast)
    image = background + contrast * image

    amplitude = rng.uniform(*family.gradient_amplitude)
    if amplitude > 0:
        image = image + amplitude * _gradient_field(rng, height, width)

    if family.lesion_count[1] > 0:
        image = image + _lesion_field(rng, height, width, family)

    gamma = rng.uniform(*family.gamma)
    image = np.clip(image, 0.0, 1.0)
    if gamma != 1.0:
        image = image**gamma

    if family.polarity is Polarity.DARK:
        image = 1.0 - image

    sigma = rng.uniform(*family.noise_sigma)
    if sigma > 0:
        image = image + rng.normal(0.0, sigma, size=image.shape)

    image = np.clip(image, 0.0, 1.0).astype(np.float32)
    return StyleRendering(image=image, style=family.name, subject_id=vessel_map.subject_id)


def vessel_contrast_gap(rendering: StyleRendering, vessel_map: VesselMap) -> float:
    """Absolute difference between mean vessel and mean background intensity."""
    mask = vessel_map.pixels.astype(bool)
    if mask.all():
        return 0.0
    return float(abs(rendering.image[mask].mean() - rendering.image[~mask].mean()))


__all__ = ["DEFAULT_CONTRAST_MARGIN", "render", "vessel_contrast_gap"]
