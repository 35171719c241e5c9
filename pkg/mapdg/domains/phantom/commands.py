from __future__ import annotations

from pathlib import Path

from mapdg.cli.registry import CommandContext, CommandSpec
from mapdg.domains.phantom.families import resolve_families
from mapdg.domains.phantom.repository import PhantomRepository
from mapdg.domains.phantom.schemas import DatasetSplit
from mapdg.domains.phantom.service import build_split


def load_dataset(ctx: CommandContext, override: Path | None = None) -> DatasetSplit:
    """Dataset written by ``gen-data``; ``--data`` points elsewhere."""
    root = override or ctx.stage_dir("data")
    ctx.record_input(root)
    return PhantomRepository(root).load_split()


def _gen_data(ctx: CommandContext) -> None:
    cfg = ctx.config.data
    split = build_split(
        cfg.n_subjects,
        resolve_families(cfg.source_families),
        resolve_families(cfg.target_families),
        ctx.seed,
        n_test=cfg.n_test,
        size=cfg.size,
        params=cfg.params,
    )
    ctx.record_output(PhantomRepository(ctx.workdir).save_split(split))


COMMANDS = (
    CommandSpec(
        name="gen-data",
        help="generate the synthetic source/target dataset",
        output_dir="data",
        handler=_gen_data,
        order=10,
    ),
)

__all__ = ["COMMANDS", "load_dataset"]
