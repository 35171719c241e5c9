from __future__ import annotations

from collections.abc import Iterator

import pytest

from mapdg.core.context import reset_run_context


@pytest.fixture(autouse=True)
def clean_run_context() -> Iterator[None]:
    reset_run_context()
    yield
    reset_run_context()
