"""Versioned checkpoint container.

A checkpoint is a ``torch.save`` dictionary holding the format tag and
version, the network kind, a shape table ``{name: [dims...]}``, the
parameter tensors, a JSON-compatible config snapshot and optional resume
state (optimizers, schedulers, RNG). Loading refuses files whose shape table
differs in any entry from the receiving network.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

import torch
from torch import nn

from mapdg.core.errors import MapRuntimeError
from mapdg.core.logging import logger

CHECKPOINT_FORMAT = "mapdg-checkpoint"
CHECKPOINT_VERSION = 1


class CheckpointMismatchError(MapRuntimeError):
    def __init__(self, path: Path, reason: str) -> None:
        self.path = path
        self.reason = reason
        super().__init__(f"Checkpoint {path} rejected: {reason}")


def shape_table(module: nn.Module) -> dict[str, list[int]]:
    return {name: list(tensor.shape) for name, tensor in module.state_dict().items()}


def save_checkpoint(
    path: Path,
    net: nn.Module,
    *,
    kind: str,
    config: dict[str, Any],
    resume_state: dict[str, Any] | None = None,
) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "kind": kind,
        "shapes": shape_table(net),
        "state_dict": {name: tensor.detach().cpu().clone() for name, tensor in net.state_dict().items()},
        "config": config,
        "resume": resume_state or {},
    }
    tmp = path.with_suffix(path.suffix + ".tmp")
    torch.save(payload, tmp)
    tmp.replace(path)
    logger.bind(event="checkpoint", kind=kind, path=str(path)).debug("Checkpoint saved")
    return path


def load_checkpoint(path: Path, net: nn.Module, *, kind: str) -> dict[str, Any]:
    """Load parameters into ``net`` in place; returns the payload for config/resume access."""
    if not path.exists():
        raise CheckpointMismatchError(path, "file does not exist")
    payload = torch.load(path, map_location="cpu", weights_only=True)
    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointMismatchError(path, "not a mapdg checkpoint")
    if payload.get("version") != CHECKPOINT_VERSION:
        raise CheckpointMismatchError(path, f"unsupported version {payload.get('version')}")
    if payload.get("kind") != kind:
        raise CheckpointMismatchError(path, f"holds a '{payload.get('kind')}' network, expected '{kind}'")

    expected = shape_table(net)
    stored = payload["shapes"]
    if stored != expected:
        missing = sorted(set(expected) - set(stored))
        extra = sorted(set(stored) - set(expected))
        differing = sorted(name for name in set(expected) & set(stored) if expected[name] != stored[name])
        raise CheckpointMismatchError(
            path, f"shape table mismatch (missing={missing}, unexpected={extra}, differing={differing})"
        )
    net.load_state_dict(payload["state_dict"], strict=True)
    return payload


__all__ = [
    "CHECKPOINT_FORMAT",
    "CHECKPOINT_VERSION",
    "CheckpointMismatchError",
    "load_checkpoint",
    "save_checkpoint",
    "shape_table",
]
