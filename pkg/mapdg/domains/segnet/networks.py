"""Residual U-Nets.

A channel plan of length ``2d`` describes ``d`` encoder blocks (the first at
full resolution, each following one at half the previous resolution) and
``d`` decoder blocks; the first ``d - 1`` decoder blocks follow a bilinear
upsample and a skip concatenation, the rest run at full resolution. The
segmentation plan C8-C32-C32-C64-C64-C16 therefore has its deepest
(bottleneck) block, C32, at a quarter of the input resolution.
"""

from __future__ import annotations

from typing import NamedTuple

import torch
import torch.nn.functional as F
from torch import nn

from mapdg.core.errors import MapInputError

SEGNET_CHANNELS: tuple[int, ...] = (8, 32, 32, 64, 64, 16)
SYNTHESIS_CHANNELS: tuple[int, ...] = (8, 16, 16, 32, 32, 8)
NUM_CLASSES = 2


class NonFiniteInputError(MapInputError):
    def __init__(self, count: int) -> None:
        self.count = count
        super().__init__(f"Input image contains {count} non-finite values")


def _num_groups(channels: int, cap: int = 8) -> int:
    for groups in range(min(cap, channels), 0, -1):
        if channels % groups == 0:
            return groups
    return 1


class ResidualBlock(nn.Module):
    """conv3x3-GroupNorm-ReLU-conv3x3-GroupNorm plus a (1x1 projected) skip, then ReLU."""

    def __init__(self, in_channels: int, out_channels: int) -> None:
        super().__init__()
        self.conv1 = nn.Conv2d(in_channels, out_channels, kernel_size=3, padding=1, bias=False)
        self.norm1 = nn.GroupNorm(_num_groups(out_channels), out_channels)
        self.conv2 = nn.Conv2d(out_channels, out_channels, kernel_size=3, padding=1, bias=False)
        self.norm2 = nn.GroupNorm(_num_groups(out_channels), out_channels)
        self.skip: nn.Module = (
            nn.Identity() if in_channels == out_channels else nn.Conv2d(in_channels, out_channels, kernel_size=1)
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        out = F.relu(self.norm1(self.conv1(x)))
        out = self.norm2(self.conv2(out))
        return F.relu(out + self.skip(x))


class UNetOutput(NamedTuple):
    output: torch.Tensor
    bottleneck: torch.Tensor


class ResidualUNet(nn.Module):
    def __init__(self, in_channels: int, out_channels: int, channels: tuple[int, ...]) -> None:
        super().__init__()
        if len(channels) < 2 or len(channels) % 2:
            raise MapInputError(f"Channel plan needs an even number (>= 2) of entries, got {channels}")
        self.channels = tuple(int(c) for c in channels)
        self.depth = len(channels) // 2
        encoder_plan = self.channels[: self.depth]
        decoder_plan = self.channels[self.depth :]

        self.encoders = nn.ModuleList()
        previous = in_channels
        for width in encoder_plan:
            self.encoders.append(ResidualBlock(previous, width))
            previous = width

        skip_widths = list(reversed(encoder_plan[:-1]))
        self.decoders = nn.ModuleList()
        for index, width in enumerate(decoder_plan):
            incoming = previous + skip_widths[index] if index < self.depth - 1 else previous
            self.decoders.append(ResidualBlock(incoming, width))
            previous = width

        self.head = nn.Conv2d(previous, out_channels, kernel_size=1)

    @property
    def downsample_factor(self) -> int:
        return 2 ** (self.depth - 1)

    @property
    def bottleneck_channels(self) -> int:
        return self.channels[self.depth - 1]

    def forward(self, x: torch.Tensor) -> UNetOutput:
        features: list[torch.Tensor] = []
        hidden = x
        for index, encoder in enumerate(self.encoders):
            if index:
                hidden = F.max_pool2d(hidden, kernel_size=2)
            hidden = encoder(hidden)
            features.append(hidden)
        bottleneck = hidden

        for index, decoder in enumerate(self.decoders):
            if index < self.depth - 1:
                skip = features[-2 - index]
                hidden = F.interpolate(hidden, size=skip.shape[-2:], mode="bilinear", align_corners=False)
                hidden = torch.cat([hidden, skip], dim=1)
            hidden = decoder(hidden)
        return UNetOutput(output=self.head(hidden), bottleneck=bottleneck)


def as_image_batch(image: torch.Tensor) -> torch.Tensor:
    """Promote H×W or B×H×W to B×1×H×W and reject non-finite pixels."""
    if image.ndim == 2:
        image = image[None, None]
    elif image.ndim == 3:
        image = image[:, None]
    elif image.ndim != 4 or image.shape[1] != 1:
        raise MapInputError(f"Expected a grayscale image or batch, got shape {tuple(image.shape)}")
    bad = int((~torch.isfinite(image)).sum())
    if bad:
        raise NonFiniteInputError(bad)
    return image


def pad_to_multiple(x: torch.Tensor, factor: int) -> tuple[torch.Tensor, tuple[int, int]]:
    """Reflect-pad the trailing edges so H and W divide by ``factor``; returns the original size."""
    height, width = int(x.shape[-2]), int(x.shape[-1])
    pad_h = (-height) % factor
    pad_w = (-width) % factor
    if pad_h or pad_w:
        mode = "reflect" if pad_h < height and pad_w < width else "replicate"
        x = F.pad(x, (0, pad_w, 0, pad_h), mode=mode)
    return x, (height, width)


class SynthesisOutput(NamedTuple):
    latent: torch.Tensor
    logits: torch.Tensor


class SynthesisNet(nn.Module):
    """f = f_d ∘ f_e with a one-channel, full-resolution latent image between the two U-Nets."""

    def __init__(self, channels: tuple[int, ...] = SYNTHESIS_CHANNELS) -> None:
        super().__init__()
        self.encoder = ResidualUNet(1, 1, channels)
        self.decoder = ResidualUNet(1, NUM_CLASSES, channels)

    @property
    def downsample_factor(self) -> int:
        return self.encoder.downsample_factor

    def forward(self, x: torch.Tensor) -> SynthesisOutput:
        x = as_image_batch(x)
        padded, (height, width) = pad_to_multiple(x, self.downsample_factor)
        latent = self.encoder(padded).output
        logits = self.decoder(latent).output
        return SynthesisOutput(latent=latent[..., :height, :width], logits=logits[..., :height, :width])


class SegOutput(NamedTuple):
    logits: torch.Tensor
    z: torch.Tensor


class SegNet(nn.Module):
    """g: residual U-Net C8-C32-C32-C64-C64-C16 with a pooled bottleneck feature tap."""

    def __init__(self) -> None:
        super().__init__()
        self.unet = ResidualUNet(1, NUM_CLASSES, SEGNET_CHANNELS)

    @property
    def channels(self) -> tuple[int, ...]:
        return self.unet.channels

    @property
    def feature_dim(self) -> int:
        return self.unet.bottleneck_channels

    @property
    def downsample_factor(self) -> int:
        return self.unet.downsample_factor

    def forward(self, x: torch.Tensor) -> SegOutput:
        x = as_image_batch(x)
        padded, (height, width) = pad_to_multiple(x, self.downsample_factor)
        result = self.unet(padded)
        z = result.bottleneck.mean(dim=(-2, -1))
        return SegOutput(logits=result.output[..., :height, :width], z=z)


__all__ = [
    "NUM_CLASSES",
    "NonFiniteInputError",
    "ResidualBlock",
    "ResidualUNet",
    "SEGNET_CHANNELS",
    "SYNTHESIS_CHANNELS",
    "SegNet",
    "SegOutput",
    "SynthesisNet",
    "SynthesisOutput",
    "as_image_batch",
    "pad_to_multiple",
]
