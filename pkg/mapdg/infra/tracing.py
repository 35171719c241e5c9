"""OpenTelemetry bootstrap for CLI runs.

Services always create spans through the API tracer; until
:func:`configure_tracing` installs a provider those spans are no-ops. One
provider lives for the whole process and each command runs under its own
root span.
"""

from __future__ import annotations

import atexit
import threading
from collections.abc import Mapping
from contextlib import ExitStack
from typing import TYPE_CHECKING

from mapdg.core.config import AppBaseSettings, settings as global_settings
from mapdg.core.logging import logger

if TYPE_CHECKING:
    from opentelemetry.sdk.trace import TracerProvider
    from opentelemetry.sdk.trace.export import SpanExporter

AttributeValue = str | bool | int | float

_PROVIDER: "TracerProvider | None" = None
_LOCK = threading.Lock()


def configure_tracing(
    *,
    exporter: "SpanExporter | None" = None,
    service_name: str | None = None,
    settings: AppBaseSettings | None = None,
) -> "TracerProvider | None":
    """Install the global tracer provider once; ``None`` when tracing is disabled.

    Later calls return the provider installed first, whatever their arguments.
    """

    cfg = settings or global_settings
    if not cfg.TRACING_ENABLED:
        return None

    from opentelemetry import trace
    from opentelemetry.exporter.otlp.proto.http.trace_exporter import OTLPSpanExporter
    from opentelemetry.sdk.resources import Resource
    from opentelemetry.sdk.trace import TracerProvider
    from opentelemetry.sdk.trace.export import BatchSpanProcessor
    from opentelemetry.sdk.trace.sampling import ParentBased, TraceIdRatioBased
    from opentelemetry.semconv.attributes.service_attributes import SERVICE_NAME, SERVICE_VERSION
    from opentelemetry.semconv.resource import ResourceAttributes

    global _PROVIDER
    with _LOCK:
        if _PROVIDER is not None:
            return _PROVIDER

        resource = Resource.create(
            {
                SERVICE_NAME: service_name or cfg.APP_NAME,
                SERVICE_VERSION: cfg.VERSION,
                ResourceAttributes.DEPLOYMENT_ENVIRONMENT: cfg.ENVIRONMENT,
            }
        )
        provider = TracerProvider(
            resource=resource,
            sampler=ParentBased(TraceIdRatioBased(cfg.TRACING_SAMPLE_RATIO)),
        )
        if exporter is None:
            exporter = OTLPSpanExporter(
                endpoint=str(cfg.OTLP_ENDPOINT),
                timeout=cfg.OTLP_TIMEOUT_SECONDS,
            )
        provider.add_span_processor(BatchSpanProcessor(exporter))
        trace.set_tracer_provider(provider)
        atexit.register(provider.shutdown)
        _PROVIDER = provider

    logger.bind(event="tracing", stage="startup", endpoint=str(cfg.OTLP_ENDPOINT)).info("Tracing enabled")
    return provider


class TracingController:
    """Root span ``mapdg.<command>`` around one CLI command, flushed on exit.

    With tracing disabled the controller is an empty context manager.
    """

    def __init__(
        self,
        settings: AppBaseSettings,
        command: str,
        attributes: Mapping[str, AttributeValue] | None = None,
    ) -> None:
        self._settings = settings
        self._command = command
        self._attributes = dict(attributes or {})
        self._provider: "TracerProvider | None" = None
        self._stack = ExitStack()

    @property
    def span_name(self) -> str:
        return f"{self._settings.APP_NAME}.{self._command}"

    def __enter__(self) -> "TracingController":
        self._provider = configure_tracing(settings=self._settings)
        if self._provider is not None:
            tracer = self._provider.get_tracer(__name__)
            self._stack.enter_context(
                tracer.start_as_current_span(
                    self.span_name,
                    attributes={"mapdg.command": self._command, **self._attributes},
                )
            )
        return self

    def __exit__(self, *exc_info: object) -> None:
        try:
            self._stack.__exit__(*exc_info)  # type: ignore[arg-type]
        finally:
            if self._provider is not None:
                try:
                    self._provider.force_flush()
                except Exception as exc:  # pragma: no cover - exporter failures must not mask the run result
                    logger.bind(event="tracing", stage="flush").warning("Tracing flush error: {}", exc)


__all__ = ["configure_tracing", "TracingController"]
