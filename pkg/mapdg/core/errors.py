"""Exception roots shared by every domain package.

Domain errors live next to the service that raises them and derive from one
of the two classes below, so the CLI can tell bad input from a failed run.
"""

from __future__ import annotations


class MapError(Exception):
    """Base class for every error raised deliberately by mapdg."""


class MapInputError(MapError, ValueError):
    """Rejected input: bad shapes, values or configuration."""


class MapRuntimeError(MapError, RuntimeError):
    """A run started but could not complete (divergence, corrupt artifacts)."""


__all__ = ["MapError", "MapInputError", "MapRuntimeError"]
