from __future__ import annotations

from collections import Counter
from collections.abc import Mapping, Sequence

import numpy as np
import torch
from opentelemetry import trace

from mapdg.core.errors import MapInputError
from mapdg.core.logging import logger
from mapdg.core.seeding import component_torch_seed
from mapdg.domains.evaluation.metrics import dice, mean_by
from mapdg.domains.evaluation.schemas import ComparisonRow, EvaluationConfig, MetricRecord
from mapdg.domains.meta_trainer.schemas import EpisodeConfig
from mapdg.domains.meta_trainer.service import train_baseline
from mapdg.domains.phantom.schemas import BranchingParams, PhantomItem, StyleFamily
from mapdg.domains.phantom.service import DEFAULT_SIZE, render_family_items
from mapdg.domains.pseudomod.service import source_input
from mapdg.domains.segnet.networks import SegNet
from mapdg.domains.segnet.service import build_segnet

_tracer = trace.get_tracer(__name__)

ORACLE_SUBJECT_OFFSET = 100_000
_BATCH = 16


class EmptySplitError(MapInputError):
    def __init__(self) -> None:
        super().__init__("Nothing to evaluate: the split is empty")


@torch.no_grad()
def vessel_probabilities(net: SegNet, images: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Softmax vessel probability per image, computed in eval mode; the net's mode is restored."""
    was_training = net.training
    net.eval()
    try:
        out: list[np.ndarray] = []
        for start in range(0, len(images), _BATCH):
            chunk = torch.from_numpy(np.stack(images[start : start + _BATCH]).astype(np.float32))[:, None]
            probs = torch.softmax(net(chunk).logits, dim=1)[:, 1]
            out.extend(plane.numpy() for plane in probs)
        return out
    finally:
        net.train(was_training)


def predict_masks(net: SegNet, images: Sequence[np.ndarray], threshold: float = 0.5) -> list[np.ndarray]:
    return [(p >= threshold).astype(np.uint8) for p in vessel_probabilities(net, images)]


def evaluate(net: SegNet, items: Sequence[PhantomItem], threshold: float = 0.5) -> list[MetricRecord]:
    """One Dice record per (subject, style), ordered by subject then style.

    Fundus-like renderings pass through CLAHE preprocessing first, other
    modalities are fed as they are.
    """
    if not items:
        raise EmptySplitError()
    with _tracer.start_as_current_span(
        "evaluation.evaluate", attributes={"eval.items": len(items), "eval.threshold": threshold}
    ):
        masks = predict_masks(net, [source_input(item) for item in items], threshold)
        records = [
            MetricRecord(
                subject_id=item.subject_id,
                domain=item.family.name,
                shift_type=item.family.shift_type.value,
                dice=dice(mask, item.vessel_map),
                threshold=threshold,
            )
            for item, mask in zip(items, masks, strict=True)
        ]
    records.sort(key=lambda r: (r.subject_id, r.domain))
    logger.bind(event="evaluate", records=len(records), mean=float(np.mean([r.dice for r in records]))).info(
        "Evaluation finished"
    )
    return records


def best_threshold(
    net: SegNet, items: Sequence[PhantomItem], thresholds: Sequence[float]
) -> tuple[float, float]:
    """(threshold, mean Dice) maximising mean Dice over ``thresholds``."""
    if not thresholds:
        raise MapInputError("At least one threshold is required")
    if not items:
        raise EmptySplitError()
    probabilities = vessel_probabilities(net, [source_input(item) for item in items])
    best: tuple[float, float] | None = None
    for threshold in thresholds:
        score = float(
            np.mean(
                [dice((p >= threshold).astype(np.uint8), item.vessel_map) for p, item in zip(probabilities, items)]
            )
        )
        if best is None or score > best[1]:
            best = (float(threshold), score)
    assert best is not None
    return best


def train_oracles(
    families: Sequence[StyleFamily],
    episode: EpisodeConfig,
    config: EvaluationConfig,
    seed: int,
    *,
    size: tuple[int, int] = DEFAULT_SIZE,
    params: BranchingParams | None = None,
) -> dict[str, SegNet]:
    """One segmenter per target family, trained on fresh subjects rendered in that style."""
    oracles: dict[str, SegNet] = {}
    for index, family in enumerate(families):
        with _tracer.start_as_current_span("evaluation.train_oracle", attributes={"oracle.family": family.name}):
            items = render_family_items(
                config.oracle_subjects,
                family,
                seed,
                first_subject_id=ORACLE_SUBJECT_OFFSET * (index + 1),
                size=size,
                params=params,
            )
            net = build_segnet(component_torch_seed(seed, f"oracle.{family.name}"))
            oracles[family.name], _ = train_baseline(net, items, episode)
        logger.bind(event="oracle", family=family.name, subjects=len(items)).info("Oracle trained")
    return oracles


def evaluate_oracles(
    oracles: Mapping[str, SegNet], items: Sequence[PhantomItem], threshold: float = 0.5
) -> list[MetricRecord]:
    """Each oracle scored only on the style it was trained on."""
    records: list[MetricRecord] = []
    for name, net in oracles.items():
        own = [item for item in items if item.family.name == name]
        if own:
            records.extend(evaluate(net, own, threshold))
    records.sort(key=lambda r: (r.subject_id, r.domain))
    return records


def compare(records_by_method: Mapping[str, Sequence[MetricRecord]]) -> list[ComparisonRow]:
    """Mean Dice per (method, style), methods in the given order."""
    rows: list[ComparisonRow] = []
    for method, records in records_by_method.items():
        shift_of = {record.domain: record.shift_type for record in records}
        counts = Counter(record.domain for record in records)
        for name, value in mean_by(records, lambda r: r.domain).items():
            rows.append(
                ComparisonRow(method=method, domain=name, shift_type=shift_of[name], mean_dice=value, subjects=counts[name])
            )
    return rows


def format_comparison(rows: Sequence[ComparisonRow]) -> str:
    methods = list(dict.fromkeys(row.method for row in rows))
    domains = sorted({(row.shift_type, row.domain) for row in rows})
    table = {(row.method, row.domain): row.mean_dice for row in rows}
    header = f"{'style':<22}{'shift':<7}" + "".join(f"{m:>12}" for m in methods)
    lines = [header, "-" * len(header)]
    for shift, domain in domains:
        cells = "".join(
            f"{100 * table[(m, domain)]:>12.2f}" if (m, domain) in table else f"{'n/a':>12}" for m in methods
        )
        lines.append(f"{domain:<22}{shift:<7}{cells}")
    return "\n".join(lines) + "\n"


__all__ = [
    "EmptySplitError",
    "ORACLE_SUBJECT_OFFSET",
    "best_threshold",
    "compare",
    "evaluate_oracles",
    "evaluate",
    "format_comparison",
    "predict_masks",
    "train_oracles",
    "vessel_probabilities",
]
