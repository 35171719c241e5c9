from __future__ import annotations

from collections import defaultdict
from collections.abc import Callable, Iterable

import numpy as np

from mapdg.core.errors import MapInputError
from mapdg.domains.evaluation.schemas import MetricRecord
from mapdg.domains.phantom.schemas import VesselMap


class ShapeMismatchError(MapInputError):
    def __init__(self, pred: tuple[int, ...], truth: tuple[int, ...]) -> None:
        super().__init__(f"Prediction shape {pred} does not match ground truth {truth}")


def dice(pred: np.ndarray, truth: np.ndarray | VesselMap) -> float:
    """2|P∩Y| / (|P|+|Y|), and 1 when both masks are empty."""
    y = truth.pixels if isinstance(truth, VesselMap) else truth
    if pred.shape != y.shape:
        raise ShapeMismatchError(pred.shape, y.shape)
    p = pred.astype(bool)
    t = y.astype(bool)
    total = int(p.sum()) + int(t.sum())
    if total == 0:
        return 1.0
    return 2.0 * float(np.logical_and(p, t).sum()) / total


def mean_by(records: Iterable[MetricRecord], key: Callable[[MetricRecord], str]) -> dict[str, float]:
    groups: dict[str, list[float]] = defaultdict(list)
    for record in records:
        groups[key(record)].append(record.dice)
    return {name: float(np.mean(values)) for name, values in sorted(groups.items())}


def mean_dice(records: Iterable[MetricRecord]) -> float:
    values = [record.dice for record in records]
    if not values:
        raise MapInputError("No metric records to average")
    return float(np.mean(values))


__all__ = ["ShapeMismatchError", "dice", "mean_by", "mean_dice"]
