"""Shared domain types: visual attributes, class labels, per-image feature vectors."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


class Attribute(str, enum.Enum):
    """One named visual feature family producing a fixed-dimension vector per image."""

    COLOR = "Color"
    HOG = "HOG"
    TEXTURE = "Texture"
    GIST = "GIST"
    SURF = "SURF"
    YOLO = "YOLO"
    OBJECT_LOC = "ObjectLoc"
    SIMCLR = "SimClr"
    VIT = "ViT"


# Fixed order of the seven non-deep attributes; "Combined Basic" concatenates
# their spectra in exactly this order.
BASIC_ATTRIBUTES: tuple[Attribute, ...] = (
    Attribute.COLOR,
    Attribute.HOG,
    Attribute.TEXTURE,
    Attribute.GIST,
    Attribute.SURF,
    Attribute.YOLO,
    Attribute.OBJECT_LOC,
)

DEEP_ATTRIBUTES: tuple[Attribute, ...] = (Attribute.SIMCLR, Attribute.VIT)

# Attributes whose vectors are histograms and therefore must be non-negative.
HISTOGRAM_ATTRIBUTES: frozenset[Attribute] = frozenset(
    {Attribute.COLOR, Attribute.SURF}
)


class ClassLabel(str, enum.Enum):
    ABSTRACT = "Abstract"
    CONCRETE = "Concrete"
    EXCLUDED = "Excluded"


@dataclass(frozen=True)
class FeatureVector:
    """One attribute's descriptor for one image.

    ``flags`` carries provenance notes (e.g. degenerate inputs that forced a
    convention such as zero-variance correlation); it never affects equality
    of the numeric payload.
    """

    image_id: str
    attribute: Attribute
    values: np.ndarray
    flags: tuple[str, ...] = field(default=())

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ValidationError(
                f"feature vector for {self.image_id!r} must be 1-d, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValidationError(
                f"feature vector for {self.image_id!r} ({self.attribute.value}) has non-finite values"
            )
        if self.attribute in HISTOGRAM_ATTRIBUTES and np.any(values < 0):
            raise ValidationError(
                f"histogram attribute {self.attribute.value} must be non-negative"
            )
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])
