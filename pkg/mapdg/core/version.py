"""Tool version lookup.

The version stamped into run manifests and checkpoints comes from, in order:
the ``MAPDG_VERSION`` environment variable, the installed distribution
metadata (written by hatch-vcs from git tags), the generated
``mapdg/_version.py`` of an editable checkout, or ``0.0.0-dev``.
"""

from __future__ import annotations

import os
from importlib.metadata import PackageNotFoundError, version

_DISTRIBUTION = "mapdg"
_FALLBACK = "0.0.0-dev"


def get_app_version() -> str:
    """Return the tool version string, e.g. ``"1.2.3"`` or ``"0.0.0-dev"``.

    Examples:
        >>> get_app_version()  # tagged release
        '1.2.3'
    """
    env_version = os.getenv("MAPDG_VERSION")
    if env_version:
        return env_version

    try:
        return version(_DISTRIBUTION)
    except PackageNotFoundError:
        pass

    try:
        from mapdg._version import __version__  # type: ignore[import-not-found]
    except ImportError:
        return _FALLBACK
    return str(__version__)


__all__ = ["get_app_version"]
