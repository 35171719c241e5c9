"""Synthetic subjects: binary vessel trees rendered under several style families."""

from mapdg.domains.phantom.generator import generate_vessel_map
from mapdg.domains.phantom.render import render
from mapdg.domains.phantom.schemas import DatasetSplit, PhantomItem, StyleFamily, StyleRendering, VesselMap
from mapdg.domains.phantom.service import build_split

__all__ = [
    "DatasetSplit",
    "PhantomItem",
    "StyleFamily",
    "StyleRendering",
    "VesselMap",
    "build_split",
    "generate_vessel_map",
    "render",
]
