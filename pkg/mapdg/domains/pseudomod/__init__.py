from mapdg.domains.pseudomod.preprocess import preprocess_d0, rescale_unit
from mapdg.domains.pseudomod.repository import BankRepository
from mapdg.domains.pseudomod.schemas import BankEntry, PseudoModalityBank, SynthesisConfig
from mapdg.domains.pseudomod.service import (
    BankShapeError,
    EmptyDatasetError,
    SynthesisRun,
    build_bank,
    min_style_diversity,
    source_input,
    style_diversity,
    train_synthesis,
)

__all__ = [
    "BankEntry",
    "BankRepository",
    "BankShapeError",
    "EmptyDatasetError",
    "PseudoModalityBank",
    "SynthesisConfig",
    "SynthesisRun",
    "build_bank",
    "min_style_diversity",
    "preprocess_d0",
    "rescale_unit",
    "source_input",
    "style_diversity",
    "train_synthesis",
]
