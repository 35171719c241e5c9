"""Root-seed splitting and deterministic execution.

Every random stream in a run derives from one integer seed. Components ask
for their own stream by name; the name is hashed with CRC-32 so the mapping
is stable across processes and Python versions (``hash()`` is salted).
"""

from __future__ import annotations

import zlib
from collections.abc import Callable
from typing import TypeVar

import numpy as np
import torch

from mapdg.core.config import settings
from mapdg.core.logging import logger

T = TypeVar("T")


def component_seed_sequence(seed: int, component: str) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(seed), spawn_key=(zlib.crc32(component.encode("utf-8")),))


def component_rng(seed: int, component: str) -> np.random.Generator:
    """Independent numpy generator for ``component`` under root ``seed``."""
    return np.random.default_rng(component_seed_sequence(seed, component))


def component_torch_seed(seed: int, component: str) -> int:
    """63-bit integer suitable for ``torch.manual_seed``."""
    state = component_seed_sequence(seed, component).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1])) & ((1 << 63) - 1)


def seeded_build(factory: Callable[[], T], torch_seed: int) -> T:
    """Run ``factory`` under a private torch RNG so parameter init never touches global state."""
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(torch_seed)
        return factory()


def configure_torch_runtime(*, deterministic: bool | None = None) -> bool:
    """Apply thread and determinism settings; returns the effective deterministic flag."""
    effective = settings.DETERMINISTIC if deterministic is None else deterministic
    torch.use_deterministic_algorithms(effective)
    if effective:
        torch.set_num_threads(1)
    elif settings.TORCH_NUM_THREADS:
        torch.set_num_threads(settings.TORCH_NUM_THREADS)
    logger.bind(event="runtime", deterministic=effective, threads=torch.get_num_threads()).debug(
        "Torch runtime configured"
    )
    return effective


__all__ = [
    "component_rng",
    "component_seed_sequence",
    "component_torch_seed",
    "configure_torch_runtime",
    "seeded_build",
]
