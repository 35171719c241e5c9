"""Anatomy-consistency probe for a pseudo-modality bank.

A probe segmenter is trained on x⁰ alone and scored on x¹, x², x³ of the
same subjects. The synthesis latents carry no fixed vessel polarity, so the
probe also sees every x⁰ inverted; a high score then means the vessels sit
where the labels say, whatever their brightness.
"""

from __future__ import annotations

import numpy as np
from opentelemetry import trace

from mapdg.core.logging import logger
from mapdg.core.seeding import component_torch_seed
from mapdg.domains.evaluation.metrics import dice
from mapdg.domains.evaluation.schemas import EvaluationConfig, ProbeReport
from mapdg.domains.evaluation.service import predict_masks
from mapdg.domains.meta_trainer.schemas import EpisodeConfig
from mapdg.domains.meta_trainer.service import train_baseline, with_flags
from mapdg.domains.pseudomod.schemas import BankEntry, PseudoModalityBank
from mapdg.domains.pseudomod.service import min_style_diversity
from mapdg.domains.segnet.networks import SegNet
from mapdg.domains.segnet.service import build_segnet

_tracer = trace.get_tracer(__name__)

# inverted copies get ids past any real subject so bank ids stay unique
INVERTED_ID_OFFSET = 1_000_000


def _probe_bank(bank: PseudoModalityBank) -> PseudoModalityBank:
    entries: list[BankEntry] = list(bank.entries)
    for entry in bank:
        flipped = (1.0 - entry.x0).astype(np.float32)
        entries.append(
            BankEntry(
                subject_id=entry.subject_id + INVERTED_ID_OFFSET,
                x0=flipped,
                x1=flipped,
                x2=flipped,
                x3=flipped,
                label=entry.label,
            )
        )
    return PseudoModalityBank(entries=tuple(entries))


def train_probe(bank: PseudoModalityBank, episode: EpisodeConfig, config: EvaluationConfig, seed: int) -> SegNet:
    cfg = with_flags(episode, epochs=config.probe_epochs, seed=seed)
    net = build_segnet(component_torch_seed(seed, "probe.init"))
    probe, _ = train_baseline(net, _probe_bank(bank), cfg)
    return probe


def probe_anatomy_consistency(
    bank: PseudoModalityBank,
    episode: EpisodeConfig,
    config: EvaluationConfig | None = None,
    *,
    seed: int = 0,
) -> ProbeReport:
    """Dice of an x⁰-trained probe on each of x¹…x³, plus the bank's minimum pairwise style difference."""
    config = config or EvaluationConfig()
    with _tracer.start_as_current_span("evaluation.probe_anatomy_consistency", attributes={"probe.subjects": len(bank)}):
        probe = train_probe(bank, episode, config, seed)
        per_modality: dict[int, float] = {}
        for k in (1, 2, 3):
            masks = predict_masks(probe, [entry.modality(k) for entry in bank], config.threshold)
            per_modality[k] = float(np.mean([dice(mask, entry.label) for mask, entry in zip(masks, bank)]))
        report = ProbeReport(
            per_modality=per_modality,
            threshold=config.probe_threshold,
            diversity=min_style_diversity(bank),
            diversity_floor=config.diversity_floor,
        )
    logger.bind(
        event="probe",
        per_modality=per_modality,
        diversity=report.diversity,
        consistent=report.consistent,
        diverse=report.diverse,
    ).info("Anatomy-consistency probe finished")
    return report


__all__ = ["INVERTED_ID_OFFSET", "probe_anatomy_consistency", "train_probe"]
