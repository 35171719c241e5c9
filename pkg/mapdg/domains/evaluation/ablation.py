"""Component ablation over (episodic, L_sim, L_ncc).

Every cell is trained from the same seeds with the same data; only the
three switches differ. L_sim exists only with episodic training.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from opentelemetry import trace

from mapdg.core.errors import MapInputError
from mapdg.core.logging import logger
from mapdg.core.seeding import component_torch_seed
from mapdg.domains.evaluation.metrics import mean_by
from mapdg.domains.evaluation.schemas import SHIFT_ORDER, AblationCell, AblationConfig, AblationFlags
from mapdg.domains.evaluation.service import evaluate
from mapdg.domains.meta_trainer.schemas import EpisodeConfig
from mapdg.domains.meta_trainer.service import train, with_flags
from mapdg.domains.phantom.schemas import PhantomItem
from mapdg.domains.pseudomod.schemas import PseudoModalityBank
from mapdg.domains.segnet.service import build_segnet

_tracer = trace.get_tracer(__name__)

ABLATION_ROWS: tuple[AblationFlags, ...] = (
    AblationFlags(episodic=False, use_sim=False, use_ncc=False),
    AblationFlags(episodic=False, use_sim=False, use_ncc=True),
    AblationFlags(episodic=True, use_sim=False, use_ncc=False),
    AblationFlags(episodic=True, use_sim=True, use_ncc=False),
    AblationFlags(episodic=True, use_sim=False, use_ncc=True),
    AblationFlags(episodic=True, use_sim=True, use_ncc=True),
)


class InvalidAblationError(MapInputError):
    def __init__(self, flags: AblationFlags) -> None:
        self.flags = flags
        super().__init__(f"Ablation cell {flags.label} is invalid: L_sim is only applicable with episodic training")


def validate_flags(flags: AblationFlags) -> AblationFlags:
    if flags.use_sim and not flags.episodic:
        raise InvalidAblationError(flags)
    return flags


def run_cell(
    flags: AblationFlags,
    bank: PseudoModalityBank,
    test_items: Sequence[PhantomItem],
    episode: EpisodeConfig,
    config: AblationConfig,
    *,
    threshold: float = 0.5,
) -> AblationCell:
    validate_flags(flags)
    per_seed_shift: list[dict[str, float]] = []
    with _tracer.start_as_current_span("evaluation.ablation_cell", attributes={"ablation.cell": flags.label}):
        for seed in config.seeds:
            cfg = with_flags(
                episode,
                episodic=flags.episodic,
                use_sim=flags.use_sim,
                use_ncc=flags.use_ncc,
                epochs=config.epochs,
                seed=seed,
            )
            net, _ = train(build_segnet(component_torch_seed(seed, "segnet.init")), bank, cfg)
            per_seed_shift.append(mean_by(evaluate(net, test_items, threshold), lambda r: r.shift_type))

    shifts = sorted({s for scores in per_seed_shift for s in scores}, key=_shift_key)
    per_shift = {s: float(np.mean([scores[s] for scores in per_seed_shift])) for s in shifts}
    per_seed = [float(np.mean(list(scores.values()))) for scores in per_seed_shift]
    cell = AblationCell(
        flags=flags,
        per_shift=per_shift,
        overall=float(np.mean(list(per_shift.values()))),
        per_seed=per_seed,
    )
    logger.bind(event="ablation_cell", cell=flags.label, overall=cell.overall).info("Ablation cell finished")
    return cell


def run_ablation(
    bank: PseudoModalityBank,
    test_items: Sequence[PhantomItem],
    episode: EpisodeConfig,
    config: AblationConfig | None = None,
    *,
    rows: Sequence[AblationFlags] = ABLATION_ROWS,
    threshold: float = 0.5,
) -> list[AblationCell]:
    config = config or AblationConfig()
    for flags in rows:
        validate_flags(flags)
    return [run_cell(flags, bank, test_items, episode, config, threshold=threshold) for flags in rows]


def _shift_key(shift: str) -> tuple[int, str]:
    return (SHIFT_ORDER.index(shift) if shift in SHIFT_ORDER else len(SHIFT_ORDER), shift)


def _mark(flag: bool) -> str:
    return "x" if flag else ""


def format_ablation_table(cells: Sequence[AblationCell]) -> str:
    """Plain-text table, one row per cell, Dice in percent."""
    shifts = sorted({s for cell in cells for s in cell.per_shift}, key=_shift_key)
    header = f"{'Episodic':^10}{'L_sim':^8}{'L_ncc':^8}" + "".join(f"{'Type ' + s:>10}" for s in shifts) + f"{'Avg':>10}"
    lines = [header, "-" * len(header)]
    for cell in cells:
        scores = "".join(
            f"{100 * cell.per_shift[s]:>10.2f}" if s in cell.per_shift else f"{'n/a':>10}" for s in shifts
        )
        lines.append(
            f"{_mark(cell.flags.episodic):^10}{_mark(cell.flags.use_sim):^8}{_mark(cell.flags.use_ncc):^8}"
            f"{scores}{100 * cell.overall:>10.2f}"
        )
    return "\n".join(lines) + "\n"


__all__ = [
    "ABLATION_ROWS",
    "InvalidAblationError",
    "format_ablation_table",
    "run_ablation",
    "run_cell",
    "validate_flags",
]
