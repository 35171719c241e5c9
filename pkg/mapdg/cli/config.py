"""Run configuration: one TOML file, one section per command, CLI overrides on top.

Resolution order: defaults, then ``--config`` (TOML, or the ``run.json``
manifest of an earlier run), then ``--set section.key=value`` overrides,
then ``--seed``. ``episode.seed`` always follows the run seed.
"""

from __future__ import annotations

import json
import tomllib
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from mapdg.core.errors import MapInputError
from mapdg.domains.evaluation.schemas import AblationConfig, EvaluationConfig
from mapdg.domains.meta_trainer.schemas import EpisodeConfig
from mapdg.domains.mixup.schemas import DumpConfig
from mapdg.domains.phantom.schemas import DataConfig
from mapdg.domains.pseudomod.schemas import SynthesisConfig


class ConfigError(MapInputError):
    pass


class RunConfig(BaseModel):
    seed: int = 0
    data: DataConfig = DataConfig()
    synthesis: SynthesisConfig = SynthesisConfig()
    episode: EpisodeConfig = EpisodeConfig()
    evaluation: EvaluationConfig = EvaluationConfig()
    ablation: AblationConfig = AblationConfig()
    dump: DumpConfig = DumpConfig()

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def _episode_follows_seed(self) -> "RunConfig":
        if self.episode.seed != self.seed:
            self.episode = EpisodeConfig.model_validate({**self.episode.model_dump(), "seed": self.seed})
        return self


def _parse_value(raw: str) -> Any:
    """TOML literal if it parses (numbers, booleans, arrays, quoted strings), else the bare string."""
    try:
        return tomllib.loads(f"value = {raw}")["value"]
    except tomllib.TOMLDecodeError:
        return raw


def apply_override(data: dict[str, Any], assignment: str) -> None:
    """Apply ``section.key=value`` (nested keys allowed) to a dumped config in place."""
    if "=" not in assignment:
        raise ConfigError(f"Override '{assignment}' is not of the form section.key=value")
    path, raw = assignment.split("=", 1)
    keys = [key.strip() for key in path.split(".")]
    node: Any = data
    for depth, key in enumerate(keys):
        if not isinstance(node, dict) or key not in node:
            raise ConfigError(f"Unknown configuration key '{'.'.join(keys[: depth + 1])}'")
        if depth == len(keys) - 1:
            node[key] = _parse_value(raw.strip())
        else:
            node = node[key]


def _read_file(path: Path) -> dict[str, Any]:
    if not path.exists():
        raise ConfigError(f"Configuration file {path} does not exist")
    try:
        if path.suffix == ".json":
            payload = json.loads(path.read_text(encoding="utf-8"))
            return payload["config"] if "config" in payload and "command" in payload else payload
        return tomllib.loads(path.read_text(encoding="utf-8"))
    except (tomllib.TOMLDecodeError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"Cannot parse {path}: {exc}") from exc


def _deep_merge(base: dict[str, Any], update: dict[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_run_config(
    path: Path | None = None,
    overrides: Sequence[str] = (),
    seed: int | None = None,
) -> RunConfig:
    data: dict[str, Any] = RunConfig().model_dump(mode="json")
    try:
        if path is not None:
            data = _deep_merge(data, _read_file(path))
            # validate file contents before overrides so key errors name the file
            data = RunConfig.model_validate(data).model_dump(mode="json")
        for assignment in overrides:
            apply_override(data, assignment)
        if seed is not None:
            data["seed"] = seed
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"Invalid configuration: {exc}") from exc


__all__ = ["ConfigError", "RunConfig", "apply_override", "load_run_config"]
