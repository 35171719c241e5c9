from mapdg.core.config import settings
from mapdg.core.errors import MapError, MapInputError, MapRuntimeError

__all__ = ["settings", "MapError", "MapInputError", "MapRuntimeError"]
