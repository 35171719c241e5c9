"""Built-in style families.

Source families are fundus-like (dark vessels, preprocessed to D0 before
segmentation). Target families are labelled with the domain-shift type
they imitate: I pathology-like lesions, II contrast/site shift, III a
change of modality with reversed vessel polarity.
"""

from __future__ import annotations

from collections.abc import Sequence

from mapdg.core.errors import MapInputError
from mapdg.domains.phantom.schemas import Modality, Polarity, ShiftType, StyleFamily


class UnknownFamilyError(MapInputError):
    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"Unknown style family '{name}'; known: {sorted(FAMILY_REGISTRY)}")


IDENTITY = StyleFamily(
    name="identity",
    polarity=Polarity.BRIGHT,
    modality=Modality.OCTA,
    shift_type=ShiftType.IDENTITY,
)

INVERTED_IDENTITY = StyleFamily(
    name="inverted_identity",
    polarity=Polarity.DARK,
    modality=Modality.OCTA,
    shift_type=ShiftType.IDENTITY,
)

FUNDUS_SHARP = StyleFamily(
    name="fundus_sharp",
    polarity=Polarity.DARK,
    modality=Modality.FUNDUS,
    shift_type=ShiftType.SOURCE,
    gamma=(0.8, 1.2),
    noise_sigma=(0.01, 0.03),
    blur_radius=(0.3, 0.7),
    gradient_amplitude=(0.05, 0.20),
    background=(0.05, 0.15),
    contrast=(0.50, 0.65),
)

FUNDUS_HAZY = StyleFamily(
    name="fundus_hazy",
    polarity=Polarity.DARK,
    modality=Modality.FUNDUS,
    shift_type=ShiftType.SOURCE,
    gamma=(1.0, 1.4),
    noise_sigma=(0.02, 0.04),
    blur_radius=(0.5, 0.9),
    gradient_amplitude=(0.10, 0.25),
    background=(0.10, 0.20),
    contrast=(0.45, 0.60),
)

FUNDUS_BRIGHT = StyleFamily(
    name="fundus_bright",
    polarity=Polarity.DARK,
    modality=Modality.FUNDUS,
    shift_type=ShiftType.SOURCE,
    gamma=(0.7, 1.0),
    noise_sigma=(0.01, 0.02),
    blur_radius=(0.2, 0.6),
    gradient_amplitude=(0.0, 0.15),
    background=(0.0, 0.10),
    contrast=(0.55, 0.70),
)

FUNDUS_LESION = StyleFamily(
    name="fundus_lesion",
    polarity=Polarity.DARK,
    modality=Modality.FUNDUS,
    shift_type=ShiftType.PATHOLOGY,
    gamma=(0.8, 1.2),
    noise_sigma=(0.01, 0.03),
    blur_radius=(0.3, 0.7),
    gradient_amplitude=(0.05, 0.20),
    background=(0.05, 0.15),
    contrast=(0.45, 0.60),
    lesion_count=(2, 5),
    lesion_radius=(0.04, 0.10),
    lesion_intensity=(0.20, 0.40),
)

FUNDUS_LOW_CONTRAST = StyleFamily(
    name="fundus_low_contrast",
    polarity=Polarity.DARK,
    modality=Modality.FUNDUS,
    shift_type=ShiftType.CROSS_SITE,
    gamma=(1.3, 1.8),
    noise_sigma=(0.03, 0.05),
    blur_radius=(0.6, 1.0),
    gradient_amplitude=(0.20, 0.35),
    background=(0.20, 0.30),
    contrast=(0.35, 0.45),
)

OCTA_LIKE = StyleFamily(
    name="octa_like",
    polarity=Polarity.BRIGHT,
    modality=Modality.OCTA,
    shift_type=ShiftType.CROSS_MODALITY,
    gamma=(0.8, 1.1),
    noise_sigma=(0.06, 0.10),
    blur_radius=(0.0, 0.4),
    background=(0.0, 0.05),
    contrast=(0.60, 0.90),
)

FA_LIKE = StyleFamily(
    name="fa_like",
    polarity=Polarity.BRIGHT,
    modality=Modality.FA,
    shift_type=ShiftType.CROSS_MODALITY,
    gamma=(0.9, 1.3),
    noise_sigma=(0.02, 0.04),
    blur_radius=(0.8, 1.2),
    gradient_amplitude=(0.10, 0.30),
    background=(0.10, 0.25),
    contrast=(0.50, 0.70),
    lesion_count=(0, 3),
    lesion_radius=(0.02, 0.05),
    lesion_intensity=(0.20, 0.50),
)

DEFAULT_SOURCE_FAMILIES: tuple[StyleFamily, ...] = (FUNDUS_SHARP, FUNDUS_HAZY, FUNDUS_BRIGHT)
DEFAULT_TARGET_FAMILIES: tuple[StyleFamily, ...] = (FUNDUS_LESION, FUNDUS_LOW_CONTRAST, OCTA_LIKE)

FAMILY_REGISTRY: dict[str, StyleFamily] = {
    family.name: family
    for family in (
        IDENTITY,
        INVERTED_IDENTITY,
        FUNDUS_SHARP,
        FUNDUS_HAZY,
        FUNDUS_BRIGHT,
        FUNDUS_LESION,
        FUNDUS_LOW_CONTRAST,
        OCTA_LIKE,
        FA_LIKE,
    )
}


def get_family(name: str) -> StyleFamily:
    try:
        return FAMILY_REGISTRY[name]
    except KeyError:
        raise UnknownFamilyError(name) from None


def resolve_families(names: Sequence[str]) -> tuple[StyleFamily, ...]:
    return tuple(get_family(name) for name in names)


__all__ = [
    "DEFAULT_SOURCE_FAMILIES",
    "DEFAULT_TARGET_FAMILIES",
    "FAMILY_REGISTRY",
    "IDENTITY",
    "INVERTED_IDENTITY",
    "UnknownFamilyError",
    "get_family",
    "resolve_families",
]
