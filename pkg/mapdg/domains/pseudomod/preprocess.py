from __future__ import annotations

import cv2
import numpy as np

from mapdg.core.errors import MapInputError
from mapdg.domains.segnet.networks import NonFiniteInputError

GREEN = 1
_FLAT_TOLERANCE = 1e-12


def rescale_unit(image: np.ndarray) -> np.ndarray:
    """Min-max rescale to [0, 1]; a flat image maps to its clipped value."""
    low, high = float(image.min()), float(image.max())
    if high - low <= _FLAT_TOLERANCE:
        return np.clip(image, 0.0, 1.0).astype(np.float32)
    return ((image - low) / (high - low)).astype(np.float32)


def preprocess_d0(image: np.ndarray, *, clip_limit: float = 2.0, tiles: int = 8) -> np.ndarray:
    """x⁰ = CLAHE(1 − green(image)) rescaled to [0, 1].

    Accepts H×W grayscale (treated as the green channel) or H×W×3 colour
    in [0, 1]; the green channel sits at index 1 in both RGB and BGR order.
    """
    if image.ndim == 3:
        if image.shape[2] < 3:
            raise MapInputError(f"Colour input needs 3 channels, got {image.shape[2]}")
        green = image[..., GREEN]
    elif image.ndim == 2:
        green = image
    else:
        raise MapInputError(f"Expected H×W or H×W×3 image, got shape {image.shape}")

    bad = int((~np.isfinite(green)).sum())
    if bad:
        raise NonFiniteInputError(bad)

    reversed_green = 1.0 - np.clip(green.astype(np.float64), 0.0, 1.0)
    as_bytes = np.round(reversed_green * 255.0).astype(np.uint8)
    clahe = cv2.createCLAHE(clipLimit=clip_limit, tileGridSize=(tiles, tiles))
    equalized = clahe.apply(as_bytes).astype(np.float32) / 255.0
    return rescale_unit(equalized)


__all__ = ["preprocess_d0", "rescale_unit"]
