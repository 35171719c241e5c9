from __future__ import annotations

import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
import torch
from opentelemetry import trace

from mapdg.core.context import update_run_context
from mapdg.core.errors import MapInputError, MapRuntimeError
from mapdg.core.logging import logger
from mapdg.core.seeding import component_rng, component_torch_seed
from mapdg.domains.losses.functional import NonFiniteLossError, seg_loss
from mapdg.domains.phantom.schemas import PhantomItem
from mapdg.domains.pseudomod.preprocess import preprocess_d0, rescale_unit
from mapdg.domains.pseudomod.schemas import BankEntry, PseudoModalityBank, SynthesisConfig
from mapdg.domains.segnet.networks import SynthesisNet
from mapdg.domains.segnet.service import build_synthesis_net, to_tensor

_tracer = trace.get_tracer(__name__)


class EmptyDatasetError(MapInputError):
    def __init__(self, what: str) -> None:
        super().__init__(f"Cannot {what} from an empty dataset")


class BankShapeError(MapRuntimeError):
    def __init__(self, subject_id: int, found: tuple[int, ...], expected: tuple[int, ...]) -> None:
        self.subject_id = subject_id
        super().__init__(f"Synthesis output {found} for subject {subject_id} does not match its vessel map {expected}")


@dataclass
class SynthesisRun:
    net: SynthesisNet
    seed: int
    initial_loss: float
    final_loss: float
    epoch_losses: list[float] = field(default_factory=list)


def source_input(item: PhantomItem, config: SynthesisConfig | None = None) -> np.ndarray:
    """The grayscale x⁰ fed to every network: fundus-like renderings go through CLAHE, others pass through."""
    config = config or SynthesisConfig()
    if item.family.needs_preprocessing:
        return preprocess_d0(item.rendering.image, clip_limit=config.clahe_clip_limit, tiles=config.clahe_tiles)
    return item.rendering.image.astype(np.float32, copy=True)


def _stack(items: Sequence[PhantomItem], config: SynthesisConfig) -> tuple[torch.Tensor, torch.Tensor]:
    shapes = {item.vessel_map.shape for item in items}
    if len(shapes) != 1:
        raise MapInputError(f"Synthesis training needs one image size, found {sorted(shapes)}")
    images = torch.stack([to_tensor(source_input(item, config)) for item in items])[:, None]
    labels = torch.stack([torch.from_numpy(item.vessel_map.pixels.astype(np.int64)) for item in items])
    return images, labels


@torch.no_grad()
def _dataset_loss(net: SynthesisNet, images: torch.Tensor, labels: torch.Tensor, batch_size: int) -> float:
    was_training = net.training
    net.eval()
    total = 0.0
    for start in range(0, images.shape[0], batch_size):
        chunk = slice(start, start + batch_size)
        total += float(seg_loss(net(images[chunk]).logits, labels[chunk])) * images[chunk].shape[0]
    net.train(was_training)
    return total / images.shape[0]


def train_synthesis(
    items: Sequence[PhantomItem],
    seed: int,
    epochs: int | None = None,
    config: SynthesisConfig | None = None,
) -> SynthesisRun:
    """Fit one synthesis network f = f_d ∘ f_e to the source split with L_seg.

    ``seed`` controls both initialisation and batch order; it is the only
    difference between the three pseudo-modalities.
    """
    config = config or SynthesisConfig()
    if not items:
        raise EmptyDatasetError("train a synthesis network")
    epochs = config.epochs if epochs is None else epochs
    if epochs < 0:
        raise MapInputError(f"epochs must be >= 0, got {epochs}")

    images, labels = _stack(items, config)
    net = build_synthesis_net(component_torch_seed(seed, "synthesis.init"), config.channels)
    rng = component_rng(seed, "synthesis.shuffle")
    optimizer = torch.optim.Adam(net.parameters(), lr=config.learning_rate)

    with _tracer.start_as_current_span(
        "pseudomod.train_synthesis",
        attributes={"synthesis.seed": seed, "synthesis.epochs": epochs, "synthesis.subjects": len(items)},
    ):
        initial = _dataset_loss(net, images, labels, config.batch_size)
        epoch_losses: list[float] = []
        net.train()
        for epoch in range(epochs):
            update_run_context(epoch=epoch)
            order = torch.from_numpy(rng.permutation(images.shape[0]))
            running = 0.0
            for start in range(0, len(order), config.batch_size):
                index = order[start : start + config.batch_size]
                loss = seg_loss(net(images[index]).logits, labels[index])
                value = float(loss.detach())
                if not math.isfinite(value):
                    raise NonFiniteLossError("L_seg", value, context=f"synthesis seed {seed}, epoch {epoch}")
                optimizer.zero_grad(set_to_none=True)
                loss.backward()
                optimizer.step()
                running += value * len(index)
            epoch_losses.append(running / images.shape[0])
            logger.bind(event="synthesis_epoch", seed=seed, epoch=epoch, loss=epoch_losses[-1]).debug(
                "Synthesis epoch finished"
            )
        final = _dataset_loss(net, images, labels, config.batch_size)

    net.eval()
    logger.bind(event="train_synthesis", seed=seed, initial=initial, final=final).info("Synthesis network trained")
    return SynthesisRun(net=net, seed=seed, initial_loss=initial, final_loss=final, epoch_losses=epoch_losses)


@torch.no_grad()
def _latents(net: SynthesisNet, images: torch.Tensor, batch_size: int) -> list[np.ndarray]:
    was_training = net.training
    net.eval()
    out: list[np.ndarray] = []
    for start in range(0, images.shape[0], batch_size):
        latent = net(images[start : start + batch_size]).latent[:, 0]
        out.extend(rescale_unit(plane.numpy()) for plane in latent)
    net.train(was_training)
    return out


def build_bank(
    nets: Sequence[SynthesisNet],
    items: Sequence[PhantomItem],
    config: SynthesisConfig | None = None,
) -> PseudoModalityBank:
    """Assemble x⁰…x³ per subject; x¹…x³ are the eval-mode latents of ``nets`` on x⁰."""
    config = config or SynthesisConfig()
    if len(nets) != 3:
        raise MapInputError(f"A bank needs exactly three synthesis networks, got {len(nets)}")
    if not items:
        raise EmptyDatasetError("build a pseudo-modality bank")

    with _tracer.start_as_current_span("pseudomod.build_bank", attributes={"bank.subjects": len(items)}):
        images, _ = _stack(items, config)
        latents = [_latents(net, images, config.batch_size) for net in nets]
        entries: list[BankEntry] = []
        for index, item in enumerate(items):
            expected = item.vessel_map.shape
            planes = [latents[k][index] for k in range(3)]
            for plane in planes:
                if plane.shape != expected:
                    raise BankShapeError(item.subject_id, plane.shape, expected)
            entries.append(
                BankEntry(
                    subject_id=item.subject_id,
                    x0=images[index, 0].numpy().copy(),
                    x1=planes[0],
                    x2=planes[1],
                    x3=planes[2],
                    label=item.vessel_map.pixels,
                )
            )

    logger.bind(event="build_bank", entries=len(entries)).info("Pseudo-modality bank assembled")
    return PseudoModalityBank(entries=tuple(entries))


def style_diversity(entry: BankEntry) -> dict[tuple[int, int], float]:
    """Mean absolute intensity difference between every pair of x¹, x², x³."""
    return {
        (a, b): float(np.abs(entry.modality(a).astype(np.float64) - entry.modality(b)).mean())
        for a, b in itertools.combinations((1, 2, 3), 2)
    }


def min_style_diversity(bank: PseudoModalityBank) -> float:
    return min(min(style_diversity(entry).values()) for entry in bank)


__all__ = [
    "BankShapeError",
    "EmptyDatasetError",
    "SynthesisRun",
    "build_bank",
    "min_style_diversity",
    "source_input",
    "style_diversity",
    "train_synthesis",
]
