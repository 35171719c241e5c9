from __future__ import annotations

import argparse
import sys
from collections.abc import Sequence
from pathlib import Path

from mapdg.cli.config import ConfigError, load_run_config
from mapdg.cli.manifest import RunManifest
from mapdg.cli.registry import CommandContext, CommandSpec
from mapdg.cli.router import discover_commands
from mapdg.core.config import settings
from mapdg.core.context import reset_run_context, update_run_context
from mapdg.core.errors import MapError
from mapdg.core.logging import add_run_log_file, logger, remove_run_log_file, setup_logging
from mapdg.core.seeding import configure_torch_runtime
from mapdg.core.version import get_app_version
from mapdg.domains.losses.functional import NonFiniteLossError
from mapdg.infra.tracing import TracingController

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_DIVERGED = 3


def build_parser(specs: Sequence[CommandSpec]) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="TOML run configuration (or a previous run.json)")
    common.add_argument("--seed", type=int, default=None, help="root seed for every random stream")
    common.add_argument("--out", type=Path, default=Path("runs"), help="output root; each command writes a subdirectory")
    common.add_argument(
        "--deterministic",
        action="store_true",
        default=None,
        help="deterministic torch kernels and a single thread",
    )
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="override one configuration value (repeatable)",
    )

    parser = argparse.ArgumentParser(prog=settings.APP_NAME, description="Desk-scale domain-generalised vessel segmentation")
    parser.add_argument("--version", action="version", version=f"%(prog)s {get_app_version()}")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    for spec in specs:
        sub = subparsers.add_parser(spec.name, help=spec.help, description=spec.help, parents=[common])
        if spec.add_arguments is not None:
            spec.add_arguments(sub)
    return parser


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, NonFiniteLossError):
        return EXIT_DIVERGED
    if isinstance(exc, ConfigError):
        return EXIT_USAGE
    return EXIT_FAILURE


def run_command(spec: CommandSpec, args: argparse.Namespace, argv: Sequence[str]) -> int:
    config = load_run_config(args.config, args.overrides, args.seed)
    deterministic = configure_torch_runtime(deterministic=args.deterministic)
    workdir = args.out / spec.output_dir
    manifest = RunManifest(
        command=spec.name,
        config=config.model_dump(mode="json"),
        seed=config.seed,
        deterministic=deterministic,
        argv=list(argv),
    )
    if args.config is not None:
        manifest.inputs.append(str(args.config))
    try:
        manifest.write(workdir)
    except OSError as exc:
        raise ConfigError(f"Output directory {workdir} is not writable: {exc}") from exc

    update_run_context(run_id=manifest.run_id, command=spec.name, seed=config.seed)
    log_file = add_run_log_file(workdir)
    context = CommandContext(
        name=spec.name,
        config=config,
        out=args.out,
        workdir=workdir,
        deterministic=deterministic,
        args=args,
        manifest=manifest,
    )
    logger.bind(event="command", stage="start", workdir=str(workdir)).info("Running {}", spec.name)
    code = EXIT_OK
    error: str | None = None
    try:
        with TracingController(settings, spec.name, {"mapdg.run_id": manifest.run_id, "mapdg.seed": config.seed}):
            spec.handler(context)
    except MapError as exc:
        code, error = _exit_code(exc), str(exc)
        logger.bind(event="command", stage="error", error_type=type(exc).__name__).error(str(exc))
    except Exception as exc:
        code, error = EXIT_FAILURE, f"{type(exc).__name__}: {exc}"
        logger.bind(event="command", stage="error").opt(exception=exc).error("Unexpected failure")
    finally:
        manifest.finish(code, error)
        manifest.write(workdir)
        logger.bind(event="command", stage="end", exit_code=code).info("{} finished", spec.name)
        remove_run_log_file(log_file)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    setup_logging()
    argv = list(sys.argv[1:] if argv is None else argv)
    specs = discover_commands()
    parser = build_parser(specs)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE

    spec = next(spec for spec in specs if spec.name == args.command)
    reset_run_context()
    try:
        return run_command(spec, args, argv)
    except ConfigError as exc:
        logger.bind(event="command", stage="config").error(str(exc))
        return EXIT_USAGE
    finally:
        reset_run_context()


__all__ = ["EXIT_DIVERGED", "EXIT_FAILURE", "EXIT_OK", "EXIT_USAGE", "build_parser", "main", "run_command"]
