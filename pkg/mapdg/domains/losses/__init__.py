"""Objectives: L_seg, L_sim, the NCC matrix with L_ncc, and the weighted meta-test total."""

from mapdg.domains.losses.functional import (
    NonFiniteLossError,
    ZeroNormFeatureError,
    meta_test_loss,
    ncc_loss,
    ncc_matrix,
    seg_loss,
    seg_loss_components,
    sim_loss,
    sim_loss_batch,
)
from mapdg.domains.losses.schemas import LossWeights, NccMatrix

__all__ = [
    "LossWeights",
    "NccMatrix",
    "NonFiniteLossError",
    "ZeroNormFeatureError",
    "meta_test_loss",
    "ncc_loss",
    "ncc_matrix",
    "seg_loss",
    "seg_loss_components",
    "sim_loss",
    "sim_loss_batch",
]
