from __future__ import annotations

import argparse
from pathlib import Path

from mapdg.cli.registry import CommandContext, CommandSpec
from mapdg.core.errors import MapInputError
from mapdg.core.logging import logger
from mapdg.core.seeding import component_torch_seed
from mapdg.domains.meta_trainer.repository import TrainingRunRepository
from mapdg.domains.meta_trainer.service import train, train_baseline
from mapdg.domains.pseudomod.commands import load_bank
from mapdg.domains.segnet.networks import SegNet
from mapdg.domains.segnet.service import build_segnet, parameter_count

LATEST = "latest"


def _arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--bank", type=Path, default=None, help="bank directory (default: <out>/pseudo)")


def _meta_arguments(parser: argparse.ArgumentParser) -> None:
    _arguments(parser)
    parser.add_argument(
        "--resume",
        default=None,
        metavar="CHECKPOINT",
        help=f"epoch checkpoint to continue from, or '{LATEST}'",
    )


def _resume_path(value: str | None, repository: TrainingRunRepository) -> Path | None:
    if value is None:
        return None
    if value == LATEST:
        latest = repository.latest_checkpoint()
        if latest is None:
            raise MapInputError(f"No epoch checkpoint under {repository.root} to resume from")
        return latest
    return Path(value)


def _new_segnet(ctx: CommandContext) -> SegNet:
    net = build_segnet(component_torch_seed(ctx.seed, "segnet.init"))
    logger.bind(event="segnet", parameters=parameter_count(net)).info("Segmentation network built")
    return net


def _meta_train(ctx: CommandContext) -> None:
    bank = load_bank(ctx, ctx.args.bank)
    repository = TrainingRunRepository(ctx.workdir)
    resume = _resume_path(ctx.args.resume, repository)
    if resume is not None:
        ctx.record_input(resume)
    net = _new_segnet(ctx)
    train(net, bank, ctx.config.episode, repository=repository, resume_from=resume)
    ctx.record_output(repository.final_path)
    ctx.record_output(repository.steps_path)
    ctx.record_output(repository.epochs_path)


def _train_baseline(ctx: CommandContext) -> None:
    bank = load_bank(ctx, ctx.args.bank)
    repository = TrainingRunRepository(ctx.workdir)
    net = _new_segnet(ctx)
    train_baseline(net, bank, ctx.config.episode, repository=repository)
    ctx.record_output(repository.final_path)
    ctx.record_output(repository.steps_path)
    ctx.record_output(repository.epochs_path)


COMMANDS = (
    CommandSpec(
        name="meta-train",
        help="episodic meta-training of the segmentation network on the bank",
        output_dir="meta",
        handler=_meta_train,
        add_arguments=_meta_arguments,
        order=30,
    ),
    CommandSpec(
        name="train-baseline",
        help="plain supervised training on x0 for comparison",
        output_dir="baseline",
        handler=_train_baseline,
        add_arguments=_arguments,
        order=35,
    ),
)

__all__ = ["COMMANDS"]
