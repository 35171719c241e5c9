from __future__ import annotations

import argparse
from pathlib import Path

from mapdg.cli.registry import CommandContext, CommandSpec
from mapdg.core.context import update_run_context
from mapdg.core.logging import logger
from mapdg.core.seeding import component_torch_seed
from mapdg.domains.evaluation.ablation import run_ablation
from mapdg.domains.evaluation.repository import EvaluationRepository
from mapdg.domains.evaluation.schemas import MetricRecord
from mapdg.domains.evaluation.service import compare, evaluate, evaluate_oracles, predict_masks, train_oracles
from mapdg.domains.meta_trainer.repository import SEGNET_KIND
from mapdg.domains.phantom.commands import load_dataset
from mapdg.domains.pseudomod.commands import load_bank
from mapdg.domains.pseudomod.service import source_input
from mapdg.domains.segnet.checkpoint import load_checkpoint
from mapdg.domains.segnet.networks import SegNet
from mapdg.domains.segnet.service import build_segnet


def _load_model(ctx: CommandContext, path: Path) -> SegNet | None:
    if not path.exists():
        return None
    net = build_segnet(component_torch_seed(ctx.seed, "segnet.init"))
    load_checkpoint(path, net, kind=SEGNET_KIND)
    ctx.record_input(path)
    return net.eval()


def _untrained(ctx: CommandContext, path: Path) -> SegNet:
    logger.bind(event="eval", model=str(path)).warning("No trained model at {}; evaluating an untrained network", path)
    return build_segnet(component_torch_seed(ctx.seed, "segnet.init")).eval()


def _eval_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", type=Path, default=None, help="dataset directory (default: <out>/data)")
    parser.add_argument("--model", type=Path, default=None, help="meta-trained checkpoint (default: <out>/meta/segnet.pt)")
    parser.add_argument(
        "--baseline-model",
        type=Path,
        default=None,
        help="baseline checkpoint (default: <out>/baseline/segnet.pt, skipped when absent)",
    )


def _eval(ctx: CommandContext) -> None:
    split = load_dataset(ctx, ctx.args.data)
    cfg = ctx.config.evaluation
    repository = EvaluationRepository(ctx.workdir)

    models: dict[str, SegNet] = {}
    baseline = _load_model(ctx, ctx.args.baseline_model or ctx.stage_dir("baseline") / "segnet.pt")
    if baseline is not None:
        models["baseline"] = baseline
    map_path = ctx.args.model or ctx.stage_dir("meta") / "segnet.pt"
    models["map"] = _load_model(ctx, map_path) or _untrained(ctx, map_path)

    records: dict[str, list[MetricRecord]] = {}
    for method, net in models.items():
        update_run_context(stage=f"eval-{method}")
        records[method] = evaluate(net, split.test, cfg.threshold)
        ctx.record_output(repository.write_metrics(records[method], f"metrics_{method}.csv"))
        if cfg.dump_predictions:
            masks = predict_masks(net, [source_input(item) for item in split.test], cfg.threshold)
            ctx.record_output(
                repository.write_predictions(
                    method, [(item.subject_id, item.family.name, mask) for item, mask in zip(split.test, masks)]
                )
            )

    if cfg.oracle:
        update_run_context(stage="oracle")
        oracles = train_oracles(
            split.target_families,
            ctx.config.episode,
            cfg,
            ctx.seed,
            size=ctx.config.data.size,
            params=ctx.config.data.params,
        )
        records["oracle"] = evaluate_oracles(oracles, split.test, cfg.threshold)
        ctx.record_output(repository.write_metrics(records["oracle"], "metrics_oracle.csv"))

    ctx.record_output(repository.write_comparison(compare(records)))


def _ablation_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", type=Path, default=None, help="dataset directory (default: <out>/data)")
    parser.add_argument("--bank", type=Path, default=None, help="bank directory (default: <out>/pseudo)")


def _ablation(ctx: CommandContext) -> None:
    split = load_dataset(ctx, ctx.args.data)
    bank = load_bank(ctx, ctx.args.bank)
    cells = run_ablation(
        bank,
        split.test,
        ctx.config.episode,
        ctx.config.ablation,
        threshold=ctx.config.evaluation.threshold,
    )
    ctx.record_output(EvaluationRepository(ctx.workdir).write_ablation(cells))


COMMANDS = (
    CommandSpec(
        name="eval",
        help="score baseline, meta-trained and oracle models on the held-out styles",
        output_dir="eval",
        handler=_eval,
        add_arguments=_eval_arguments,
        order=40,
    ),
    CommandSpec(
        name="ablation",
        help="train and score the six component combinations",
        output_dir="ablation",
        handler=_ablation,
        add_arguments=_ablation_arguments,
        order=50,
    ),
)

__all__ = ["COMMANDS"]
