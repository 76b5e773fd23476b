"""visdiv: quantify the visual diversity of concept image sets and use it to
separate abstract from concrete concepts.

Pipeline: per-image attribute extraction -> per-concept cosine similarity
matrices -> order-invariant eigenvalue spectra -> classification, rating
regression, and nearest-neighbor analysis.
"""

from .types import Attribute, BASIC_ATTRIBUTES, ClassLabel, FeatureVector

__version__ = "0.1.0"

__all__ = ["Attribute", "BASIC_ATTRIBUTES", "ClassLabel", "FeatureVector", "__version__"]
