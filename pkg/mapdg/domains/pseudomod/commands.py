from __future__ import annotations

import argparse
from pathlib import Path

from mapdg.cli.registry import CommandContext, CommandSpec
from mapdg.core.context import update_run_context
from mapdg.domains.evaluation.probes import probe_anatomy_consistency
from mapdg.domains.evaluation.repository import EvaluationRepository
from mapdg.domains.phantom.commands import load_dataset
from mapdg.domains.pseudomod.repository import BankRepository
from mapdg.domains.pseudomod.schemas import PseudoModalityBank
from mapdg.domains.pseudomod.service import build_bank, train_synthesis


def load_bank(ctx: CommandContext, override: Path | None = None) -> PseudoModalityBank:
    """Bank written by ``train-pseudo``; ``--bank`` points elsewhere."""
    root = override or ctx.stage_dir("pseudo")
    ctx.record_input(root)
    return BankRepository(root).load_bank()


def _arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", type=Path, default=None, help="dataset directory (default: <out>/data)")
    parser.add_argument("--probe", action="store_true", help="also run the anatomy-consistency probe")


def _train_pseudo(ctx: CommandContext) -> None:
    split = load_dataset(ctx, ctx.args.data)
    cfg = ctx.config.synthesis
    runs = []
    for seed in cfg.seeds:
        update_run_context(stage=f"synthesis-{seed}")
        runs.append(train_synthesis(split.train, seed, config=cfg))

    update_run_context(stage="bank")
    bank = build_bank([run.net for run in runs], split.train, cfg)
    repository = BankRepository(ctx.workdir)
    for path in repository.save_runs(runs, cfg):
        ctx.record_output(path)
    ctx.record_output(repository.save_bank(bank, split.train))

    if ctx.args.probe:
        update_run_context(stage="probe")
        report = probe_anatomy_consistency(bank, ctx.config.episode, ctx.config.evaluation, seed=ctx.seed)
        ctx.record_output(EvaluationRepository(ctx.workdir).write_probe(report))


COMMANDS = (
    CommandSpec(
        name="train-pseudo",
        help="train the three synthesis networks and build the pseudo-modality bank",
        output_dir="pseudo",
        handler=_train_pseudo,
        add_arguments=_arguments,
        order=20,
    ),
)

__all__ = ["COMMANDS", "load_bank"]
