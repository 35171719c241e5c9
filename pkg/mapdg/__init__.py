"""Domain-generalized vessel segmentation by meta-learning on anatomy-consistent pseudo-modalities."""

from mapdg.core.version import get_app_version

__version__ = get_app_version()

__all__ = ["__version__"]
