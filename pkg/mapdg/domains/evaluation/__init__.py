"""Dice metrics, held-out evaluation, oracles, the component ablation and the anatomy probe."""

from mapdg.domains.evaluation.ablation import (
    ABLATION_ROWS,
    InvalidAblationError,
    format_ablation_table,
    run_ablation,
    validate_flags,
)
from mapdg.domains.evaluation.metrics import ShapeMismatchError, dice, mean_by, mean_dice
from mapdg.domains.evaluation.probes import probe_anatomy_consistency
from mapdg.domains.evaluation.repository import EvaluationRepository
from mapdg.domains.evaluation.schemas import (
    AblationCell,
    AblationConfig,
    AblationFlags,
    ComparisonRow,
    EvaluationConfig,
    MetricRecord,
    ProbeReport,
)
from mapdg.domains.evaluation.service import (
    EmptySplitError,
    best_threshold,
    compare,
    evaluate,
    evaluate_oracles,
    format_comparison,
    predict_masks,
    train_oracles,
)

__all__ = [
    "ABLATION_ROWS",
    "AblationCell",
    "AblationConfig",
    "AblationFlags",
    "ComparisonRow",
    "EmptySplitError",
    "EvaluationConfig",
    "EvaluationRepository",
    "InvalidAblationError",
    "MetricRecord",
    "ProbeReport",
    "ShapeMismatchError",
    "best_threshold",
    "compare",
    "dice",
    "evaluate",
    "evaluate_oracles",
    "format_ablation_table",
    "format_comparison",
    "mean_by",
    "mean_dice",
    "predict_masks",
    "probe_anatomy_consistency",
    "run_ablation",
    "train_oracles",
    "validate_flags",
]
