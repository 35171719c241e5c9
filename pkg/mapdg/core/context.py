from __future__ import annotations

from contextvars import ContextVar

run_id_ctx: ContextVar[str | None] = ContextVar("run_id", default=None)
command_ctx: ContextVar[str | None] = ContextVar("command", default=None)
stage_ctx: ContextVar[str | None] = ContextVar("stage", default=None)
epoch_ctx: ContextVar[str | None] = ContextVar("epoch", default=None)
seed_ctx: ContextVar[str | None] = ContextVar("seed", default=None)

_FIELDS: dict[str, ContextVar[str | None]] = {
    "run_id": run_id_ctx,
    "command": command_ctx,
    "stage": stage_ctx,
    "epoch": epoch_ctx,
    "seed": seed_ctx,
}


def reset_run_context() -> None:
    for var in _FIELDS.values():
        var.set(None)


def update_run_context(**kwargs: object) -> None:
    unknown = set(kwargs) - set(_FIELDS)
    if unknown:
        raise KeyError(f"Unknown run context fields: {sorted(unknown)}")
    for key, value in kwargs.items():
        _FIELDS[key].set(_stringify(value))


def get_run_context() -> dict[str, str]:
    context = {key: var.get() for key, var in _FIELDS.items()}
    return {key: value for key, value in context.items() if value}


def _stringify(value: object | None) -> str | None:
    if value is None:
        return None
    return str(value)


__all__ = [
    "run_id_ctx",
    "command_ctx",
    "stage_ctx",
    "epoch_ctx",
    "seed_ctx",
    "reset_run_context",
    "update_run_context",
    "get_run_context",
]
