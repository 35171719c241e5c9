from __future__ import annotations

import importlib
from functools import lru_cache
from pathlib import Path
from pkgutil import iter_modules

from mapdg.cli.registry import CommandSpec
from mapdg.core.logging import logger

_DOMAINS_PACKAGE = "mapdg.domains"


@lru_cache(maxsize=1)
def discover_commands() -> tuple[CommandSpec, ...]:
    """Collect the ``COMMANDS`` of every ``mapdg.domains.<name>.commands`` module, cached."""
    package = importlib.import_module(_DOMAINS_PACKAGE)
    package_file = getattr(package, "__file__", None)
    if not package_file:
        return ()

    package_path = Path(package_file).parent
    specs: list[CommandSpec] = []

    for _, module_name, is_pkg in iter_modules([str(package_path)]):
        if not is_pkg:
            continue
        module_path = f"{_DOMAINS_PACKAGE}.{module_name}.commands"
        try:
            module = importlib.import_module(module_path)
        except ModuleNotFoundError as exc:
            if exc.name != module_path:
                raise
            continue

        commands = getattr(module, "COMMANDS", None)
        if isinstance(commands, tuple) and all(isinstance(c, CommandSpec) for c in commands):
            specs.extend(commands)
        else:
            logger.warning("Domain module '{}' has no COMMANDS tuple of CommandSpec", module_path)

    names = [spec.name for spec in specs]
    duplicates = sorted({name for name in names if names.count(name) > 1})
    if duplicates:
        raise RuntimeError(f"Commands registered more than once: {duplicates}")
    return tuple(sorted(specs, key=lambda spec: (spec.order, spec.name)))


def command_map() -> dict[str, CommandSpec]:
    return {spec.name: spec for spec in discover_commands()}


__all__ = ["command_map", "discover_commands"]
