from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from opentelemetry import trace

from mapdg.core.errors import MapInputError
from mapdg.core.logging import logger
from mapdg.domains.phantom.generator import generate_vessel_map
from mapdg.domains.phantom.render import render
from mapdg.domains.phantom.schemas import BranchingParams, DatasetSplit, PhantomItem, Split, StyleFamily

_tracer = trace.get_tracer(__name__)

DEFAULT_SIZE = (128, 128)


class StyleOverlapError(MapInputError):
    """Raised when a family is both a training source and a held-out target"""

    def __init__(self, names: Sequence[str]) -> None:
        self.names = sorted(names)
        super().__init__(f"Source and target style families overlap: {self.names}")


class EmptyFamilySetError(MapInputError):
    def __init__(self, role: str) -> None:
        self.role = role
        super().__init__(f"At least one {role} style family is required")


def subject_seed(seed: int, subject_id: int, purpose: str) -> int:
    """Stable per-subject seed for the anatomy ("map") or a rendering ("render")."""
    tag = 0 if purpose == "map" else 1
    return int(np.random.SeedSequence([int(seed), int(subject_id), tag]).generate_state(1)[0])


def build_split(
    n_subjects: int,
    source_families: Sequence[StyleFamily],
    target_families: Sequence[StyleFamily],
    seed: int,
    *,
    n_test: int = 12,
    size: tuple[int, int] = DEFAULT_SIZE,
    params: BranchingParams | None = None,
) -> DatasetSplit:
    """Generate ``n_subjects`` training subjects and ``n_test`` held-out subjects.

    Training subject ``i`` is rendered once, under ``source_families[i % k]``.
    Every held-out subject is rendered under every target family, so target
    styles never reach training and no subject crosses the split.
    """
    if not source_families:
        raise EmptyFamilySetError("source")
    if not target_families:
        raise EmptyFamilySetError("target")
    overlap = {family.name for family in source_families} & {family.name for family in target_families}
    if overlap:
        raise StyleOverlapError(list(overlap))
    if n_subjects < 1 or n_test < 0:
        raise MapInputError(f"Need n_subjects >= 1 and n_test >= 0, got {n_subjects} and {n_test}")

    height, width = size
    params = params or BranchingParams()

    with _tracer.start_as_current_span(
        "phantom.build_split",
        attributes={"phantom.n_train": n_subjects, "phantom.n_test": n_test, "phantom.seed": seed},
    ):
        train: list[PhantomItem] = []
        for subject_id in range(n_subjects):
            family = source_families[subject_id % len(source_families)]
            train.append(_make_item(subject_id, Split.TRAIN, family, seed, height, width, params))

        test: list[PhantomItem] = []
        for subject_id in range(n_subjects, n_subjects + n_test):
            vessel_map = generate_vessel_map(
                subject_seed(seed, subject_id, "map"), height, width, params, subject_id=subject_id
            )
            for family in target_families:
                rendering = render(vessel_map, family, subject_seed(seed, subject_id, "render"))
                test.append(
                    PhantomItem(
                        subject_id=subject_id,
                        split=Split.TEST,
                        family=family,
                        vessel_map=vessel_map,
                        rendering=rendering,
                    )
                )

    logger.bind(event="build_split", n_train=len(train), n_test=len(test), seed=seed).info("Phantom split generated")
    return DatasetSplit(
        train=tuple(train),
        test=tuple(test),
        source_families=tuple(source_families),
        target_families=tuple(target_families),
        seed=seed,
    )


def _make_item(
    subject_id: int,
    split: Split,
    family: StyleFamily,
    seed: int,
    height: int,
    width: int,
    params: BranchingParams,
) -> PhantomItem:
    vessel_map = generate_vessel_map(subject_seed(seed, subject_id, "map"), height, width, params, subject_id=subject_id)
    rendering = render(vessel_map, family, subject_seed(seed, subject_id, "render"))
    return PhantomItem(subject_id=subject_id, split=split, family=family, vessel_map=vessel_map, rendering=rendering)


def render_family_items(
    n_subjects: int,
    family: StyleFamily,
    seed: int,
    *,
    first_subject_id: int,
    size: tuple[int, int] = DEFAULT_SIZE,
    params: BranchingParams | None = None,
) -> list[PhantomItem]:
    """Fresh subjects rendered under one family; used to train oracle models on a target style."""
    params = params or BranchingParams()
    return [
        _make_item(subject_id, Split.TRAIN, family, seed, size[0], size[1], params)
        for subject_id in range(first_subject_id, first_subject_id + n_subjects)
    ]


__all__ = [
    "DEFAULT_SIZE",
    "EmptyFamilySetError",
    "StyleOverlapError",
    "build_split",
    "render_family_items",
    "subject_seed",
]
