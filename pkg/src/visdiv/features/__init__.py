"""Per-image visual attribute extractors."""

from .basic import color_hsv, glcm_stats, hog, lbph, texture
from .objects import (
    Detection,
    DetectionIndex,
    HypernymMap,
    availability_stats,
    hypernym_counts,
    ingest_detections,
    location_grid,
)
from .scene import (
    CodeBook,
    InterestPoint,
    bow_encode,
    build_codebook,
    detect_and_describe,
    gist,
    load_codebook,
    save_codebook,
)

__all__ = [
    "color_hsv",
    "hog",
    "glcm_stats",
    "lbph",
    "texture",
    "gist",
    "detect_and_describe",
    "build_codebook",
    "bow_encode",
    "CodeBook",
    "InterestPoint",
    "save_codebook",
    "load_codebook",
    "Detection",
    "DetectionIndex",
    "HypernymMap",
    "ingest_detections",
    "hypernym_counts",
    "location_grid",
    "availability_stats",
]
