"""Synthesis network f = f_d ∘ f_e and segmentation network g."""

from mapdg.domains.segnet.networks import SegNet, SegOutput, SynthesisNet, SynthesisOutput
from mapdg.domains.segnet.schemas import FeatureBatch
from mapdg.domains.segnet.service import build_segnet, build_synthesis_net, seg_forward, synth_forward

__all__ = [
    "FeatureBatch",
    "SegNet",
    "SegOutput",
    "SynthesisNet",
    "SynthesisOutput",
    "build_segnet",
    "build_synthesis_net",
    "seg_forward",
    "synth_forward",
]
