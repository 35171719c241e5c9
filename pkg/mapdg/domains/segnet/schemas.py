from __future__ import annotations

from dataclasses import dataclass

import torch

from mapdg.core.errors import MapInputError


@dataclass(frozen=True)
class FeatureBatch:
    """Latent vectors with their provenance.

    ``sample_index`` is -1 for anchors (meta-train features) and the mixup
    sample index ``m`` otherwise.
    """

    vectors: torch.Tensor
    subject_ids: tuple[int, ...]
    anchor_flags: tuple[bool, ...]
    sample_index: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.vectors.ndim != 2:
            raise MapInputError(f"Feature vectors must be stacked as N×D, got shape {tuple(self.vectors.shape)}")
        rows = int(self.vectors.shape[0])
        if not (len(self.subject_ids) == len(self.anchor_flags) == len(self.sample_index) == rows):
            raise MapInputError("Every feature vector needs exactly one subject id, anchor flag and sample index")

    def __len__(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def row_keys(self) -> list[tuple[int, int, int]]:
        return [
            (subject, 0 if anchor else 1, index)
            for subject, anchor, index in zip(self.subject_ids, self.anchor_flags, self.sample_index, strict=True)
        ]

    def ordered(self) -> "FeatureBatch":
        """Rows sorted by (subject_id, anchor first, sample_index)."""
        keys = self.row_keys()
        order = sorted(range(len(keys)), key=keys.__getitem__)
        if order == list(range(len(keys))):
            return self
        index = torch.as_tensor(order, dtype=torch.long, device=self.vectors.device)
        return FeatureBatch(
            vectors=self.vectors.index_select(0, index),
            subject_ids=tuple(self.subject_ids[i] for i in order),
            anchor_flags=tuple(self.anchor_flags[i] for i in order),
            sample_index=tuple(self.sample_index[i] for i in order),
        )

    @classmethod
    def concat(cls, parts: list["FeatureBatch"]) -> "FeatureBatch":
        if not parts:
            raise MapInputError("Cannot concatenate an empty list of feature batches")
        return cls(
            vectors=torch.cat([part.vectors for part in parts], dim=0),
            subject_ids=tuple(s for part in parts for s in part.subject_ids),
            anchor_flags=tuple(a for part in parts for a in part.anchor_flags),
            sample_index=tuple(i for part in parts for i in part.sample_index),
        )


__all__ = ["FeatureBatch"]
