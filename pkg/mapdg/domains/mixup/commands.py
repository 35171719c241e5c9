from __future__ import annotations

import argparse
from pathlib import Path

from mapdg.cli.registry import CommandContext, CommandSpec
from mapdg.core.errors import MapInputError
from mapdg.core.seeding import component_rng
from mapdg.domains.mixup.dirichlet import sample_lambdas
from mapdg.domains.mixup.repository import MixupDumpRepository
from mapdg.domains.mixup.schemas import DirichletParams
from mapdg.domains.mixup.service import draw_meta_test_batch
from mapdg.domains.pseudomod.commands import load_bank


def _alpha(value: str) -> tuple[float, float, float]:
    parts = [p for p in value.replace(" ", "").split(",") if p]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated concentrations, got '{value}'")
    try:
        a1, a2, a3 = (float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if min(a1, a2, a3) <= 0.0:
        raise argparse.ArgumentTypeError(f"concentrations must be > 0, got '{value}'")
    return a1, a2, a3


def _arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--bank", type=Path, default=None, help="bank directory (default: <out>/pseudo)")
    parser.add_argument(
        "--alpha",
        dest="alphas",
        type=_alpha,
        action="append",
        default=None,
        metavar="A1,A2,A3",
        help="concentration vector to export (repeatable; default: [dump].alphas)",
    )


def _dump_mixup(ctx: CommandContext) -> None:
    bank = load_bank(ctx, ctx.args.bank)
    cfg = ctx.config.dump
    if cfg.subject_index >= len(bank):
        raise MapInputError(f"dump.subject_index {cfg.subject_index} is outside a bank of {len(bank)} subjects")
    entry = bank.entries[cfg.subject_index]
    repository = MixupDumpRepository(ctx.workdir)

    for alpha in ctx.args.alphas or cfg.alphas:
        params = DirichletParams(alpha=alpha)
        rng = component_rng(ctx.seed, f"dump.{params.tag}")
        samples = draw_meta_test_batch([entry], cfg.samples, params, rng)
        ctx.record_output(repository.save_samples(params, samples, columns=cfg.grid_columns))
        if cfg.lambda_draws:
            ctx.record_output(repository.save_draws(params, sample_lambdas(params, cfg.lambda_draws, rng)))


COMMANDS = (
    CommandSpec(
        name="dump-mixup",
        help="export mixup sample grids and λ draws per Dirichlet concentration",
        output_dir="mixup",
        handler=_dump_mixup,
        add_arguments=_arguments,
        order=60,
    ),
)

__all__ = ["COMMANDS"]
