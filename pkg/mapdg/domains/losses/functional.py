"""Objective functions.

All losses are plain functions of tensors so they compose with autograd and
``torch.autograd.gradcheck``; none keeps state.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from typing import TypeVar

import torch
import torch.nn.functional as F

from mapdg.core.errors import MapInputError, MapRuntimeError
from mapdg.domains.losses.schemas import LossWeights, NccMatrix
from mapdg.domains.segnet.schemas import FeatureBatch

DICE_SMOOTH = 1e-6

Scalar = TypeVar("Scalar", float, torch.Tensor)


class NonFiniteLossError(MapRuntimeError):
    """A loss term became NaN/inf; training aborts with the offending component named."""

    def __init__(self, component: str, value: float, *, context: str | None = None) -> None:
        self.component = component
        self.value = value
        self.context = context
        where = f" during {context}" if context else ""
        super().__init__(f"Non-finite {component} ({value}){where}")


class DimensionMismatchError(MapInputError):
    def __init__(self, expected: int, found: int) -> None:
        super().__init__(f"Feature dimensionality mismatch: expected {expected}, found {found}")


class ZeroNormFeatureError(MapInputError):
    def __init__(self, index: int) -> None:
        self.index = index
        super().__init__(f"Feature vector at batch index {index} has zero norm; its correlation is undefined")


def _check_finite_tensor(name: str, tensor: torch.Tensor) -> None:
    if not bool(torch.isfinite(tensor).all()):
        bad = tensor[~torch.isfinite(tensor)]
        raise NonFiniteLossError(name, float(bad.flatten()[0]))


def seg_loss_components(logits: torch.Tensor, target: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    """(cross-entropy, soft Dice loss) for B×2×H×W logits and a B×H×W (or H×W) binary target.

    Dice is computed per sample on the vessel-class probability and averaged
    over the batch; ``DICE_SMOOTH`` enters numerator and denominator.
    """
    if logits.ndim == 3:
        logits = logits[None]
    if target.ndim == 2:
        target = target[None]
    if logits.shape[0] != target.shape[0] or logits.shape[-2:] != target.shape[-2:]:
        raise MapInputError(f"Logits {tuple(logits.shape)} and target {tuple(target.shape)} do not align")
    _check_finite_tensor("logits", logits)

    target_long = target.long()
    ce = F.cross_entropy(logits, target_long)

    probs = torch.softmax(logits, dim=1)[:, 1]
    truth = target.to(probs.dtype)
    dims = (-2, -1)
    intersection = (probs * truth).sum(dim=dims)
    denominator = probs.sum(dim=dims) + truth.sum(dim=dims)
    dice = (2.0 * intersection + DICE_SMOOTH) / (denominator + DICE_SMOOTH)
    return ce, (1.0 - dice).mean()


def seg_loss(logits: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """L_seg = L_CE + L_Dice."""
    ce, dice = seg_loss_components(logits, target)
    return ce + dice


def sim_loss(anchor: torch.Tensor, samples: torch.Tensor | Sequence[torch.Tensor]) -> torch.Tensor:
    """Σ_m ‖z^(m) − z_a‖₁ for one subject."""
    stacked = samples if isinstance(samples, torch.Tensor) else torch.stack(list(samples))
    if stacked.ndim == 1:
        stacked = stacked[None]
    if anchor.ndim != 1:
        raise MapInputError(f"Anchor must be a single vector, got shape {tuple(anchor.shape)}")
    if stacked.shape[-1] != anchor.shape[0]:
        raise DimensionMismatchError(int(anchor.shape[0]), int(stacked.shape[-1]))
    return (stacked - anchor[None]).abs().sum()


def sim_loss_batch(anchors: Mapping[int, torch.Tensor], samples: FeatureBatch) -> torch.Tensor:
    """L_sim summed over subjects; anchors are keyed by subject id, anchor rows of ``samples`` are skipped."""
    total: torch.Tensor | None = None
    for subject in sorted(set(samples.subject_ids)):
        rows = [
            i
            for i, (s, is_anchor) in enumerate(zip(samples.subject_ids, samples.anchor_flags, strict=True))
            if s == subject and not is_anchor
        ]
        if not rows:
            continue
        if subject not in anchors:
            raise MapInputError(f"No anchor recorded for subject {subject}")
        index = torch.as_tensor(rows, dtype=torch.long, device=samples.vectors.device)
        term = sim_loss(anchors[subject], samples.vectors.index_select(0, index))
        total = term if total is None else total + term
    if total is None:
        return samples.vectors.new_zeros(())
    return total


def ncc_matrix(batch: FeatureBatch) -> NccMatrix:
    """Cosine of every pair of feature vectors plus the same-subject indicator target."""
    zero = (batch.vectors.norm(dim=1) == 0).nonzero()
    if zero.numel():
        raise ZeroNormFeatureError(int(zero[0, 0]))

    ordered = batch.ordered()
    vectors = ordered.vectors
    unit = vectors / vectors.norm(dim=1, keepdim=True)
    c = (unit @ unit.T).clamp(-1.0, 1.0)
    subjects = torch.as_tensor(ordered.subject_ids, device=vectors.device)
    c_star = (subjects[:, None] == subjects[None, :]).to(vectors.dtype)
    return NccMatrix(c=c, c_star=c_star, subject_ids=ordered.subject_ids, anchor_flags=ordered.anchor_flags)


def ncc_loss(matrix: NccMatrix) -> torch.Tensor:
    """L_ncc = ‖C* − C‖_F²."""
    return (matrix.c_star - matrix.c).pow(2).sum()


def _as_float(value: float | torch.Tensor) -> float:
    return float(value.detach()) if isinstance(value, torch.Tensor) else float(value)


def meta_test_loss(seg: Scalar, sim: Scalar, ncc: Scalar, weights: LossWeights | None = None) -> Scalar:
    """ω₁·L_seg + ω₂·L_sim + ω₃·L_ncc over floats or scalar tensors (defaults ω = 100, 100, 1)."""
    weights = weights or LossWeights()
    for name, value in (("L_seg", seg), ("L_sim", sim), ("L_ncc", ncc)):
        as_float = _as_float(value)
        if not math.isfinite(as_float):
            raise NonFiniteLossError(name, as_float)
    return weights.seg * seg + weights.sim * sim + weights.ncc * ncc


__all__ = [
    "DICE_SMOOTH",
    "DimensionMismatchError",
    "NonFiniteLossError",
    "ZeroNormFeatureError",
    "meta_test_loss",
    "ncc_loss",
    "ncc_matrix",
    "seg_loss",
    "seg_loss_components",
    "sim_loss",
    "sim_loss_batch",
]
