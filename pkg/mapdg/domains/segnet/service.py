from __future__ import annotations

import numpy as np
import torch

from mapdg.core.seeding import seeded_build
from mapdg.domains.segnet.networks import (
    SYNTHESIS_CHANNELS,
    SegNet,
    SegOutput,
    SynthesisNet,
    SynthesisOutput,
)


def to_tensor(image: np.ndarray | torch.Tensor, *, dtype: torch.dtype = torch.float32) -> torch.Tensor:
    if isinstance(image, torch.Tensor):
        return image
    return torch.from_numpy(np.ascontiguousarray(image)).to(dtype)


def build_segnet(torch_seed: int) -> SegNet:
    return seeded_build(SegNet, torch_seed)


def build_synthesis_net(torch_seed: int, channels: tuple[int, ...] = SYNTHESIS_CHANNELS) -> SynthesisNet:
    return seeded_build(lambda: SynthesisNet(channels), torch_seed)


def synth_forward(net: SynthesisNet, image: np.ndarray | torch.Tensor) -> SynthesisOutput:
    """Latent image (B×1×H×W) and segmentation logits (B×2×H×W) of the synthesis network."""
    return net(to_tensor(image))


def seg_forward(net: SegNet, image: np.ndarray | torch.Tensor) -> SegOutput:
    """Logits (B×2×H×W) and pooled bottleneck features z (B×32)."""
    return net(to_tensor(image))


def parameter_count(net: torch.nn.Module) -> int:
    return sum(p.numel() for p in net.parameters())


__all__ = [
    "build_segnet",
    "build_synthesis_net",
    "parameter_count",
    "seg_forward",
    "synth_forward",
    "to_tensor",
]
