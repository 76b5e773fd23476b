"""Reference values from the original full-scale Bing/YFCC measurement runs.

These numbers depend on web-scale image collections that cannot ship with the
toolkit; they are kept as schema content: report tables mirror these layouts,
and direction checks (e.g. concrete > abstract neighbor fractions) compare
against them qualitatively. Nothing here is an executable oracle.
"""

from __future__ import annotations

from .types import Attribute

# Row order shared by every per-attribute report table.
REPORT_ATTRIBUTE_ROWS: tuple[str, ...] = (
    Attribute.COLOR.value,
    Attribute.HOG.value,
    Attribute.TEXTURE.value,
    Attribute.GIST.value,
    Attribute.SURF.value,
    Attribute.YOLO.value,
    Attribute.OBJECT_LOC.value,
    "CombinedBasic",
    Attribute.SIMCLR.value,
    Attribute.VIT.value,
)

# Concepts retrievable per class at each per-concept image count (YFCC).
CONDITION_CONCEPT_COUNTS = {
    25: {"Concrete": 498, "Abstract": 420},
    100: {"Concrete": 494, "Abstract": 304},
    200: {"Concrete": 481, "Abstract": 237},
    300: {"Concrete": 475, "Abstract": 197},
    400: {"Concrete": 472, "Abstract": 172},
    500: {"Concrete": 463, "Abstract": 151},
}

# Percentage of images per concept with at least one object detection.
DETECTION_AVAILABILITY = {
    "YFCC-500": {"Abstract": 10.02, "Concrete": 9.48},
    "YFCC-400": {"Abstract": 10.01, "Concrete": 9.37},
    "YFCC-300": {"Abstract": 10.07, "Concrete": 9.28},
    "YFCC-200": {"Abstract": 10.09, "Concrete": 9.06},
    "YFCC-100": {"Abstract": 10.00, "Concrete": 8.87},
    "YFCC-25": {"Abstract": 10.08, "Concrete": 8.64},
    "Bing-25": {"Abstract": 14.28, "Concrete": 15.28},
}

# Mean percentage of top-N neighbors sharing the query's concept.
SAME_CONCEPT_NEIGHBOR_PCT = {
    "Bing-25": {
        "Color": {"Abstract": 0.68, "Concrete": 0.96},
        "HOG": {"Abstract": 0.48, "Concrete": 1.44},
        "Texture": {"Abstract": 0.29, "Concrete": 0.33},
        "GIST": {"Abstract": 0.55, "Concrete": 1.88},
        "SURF": {"Abstract": 0.64, "Concrete": 1.70},
        "YOLO": {"Abstract": 2.25, "Concrete": 3.19},
        "ObjectLoc": {"Abstract": 0.18, "Concrete": 0.39},
        "CombinedBasic": {"Abstract": 0.64, "Concrete": 2.14},
        "SimClr": {"Abstract": 0.65, "Concrete": 1.49},
        "ViT": {"Abstract": 2.83, "Concrete": 26.44},
    },
    "YFCC-25": {
        "Color": {"Abstract": 1.70, "Concrete": 0.95},
        "HOG": {"Abstract": 0.68, "Concrete": 0.58},
        "Texture": {"Abstract": 0.35, "Concrete": 0.26},
        "GIST": {"Abstract": 1.03, "Concrete": 0.76},
        "SURF": {"Abstract": 0.93, "Concrete": 0.62},
        "YOLO": {"Abstract": 1.09, "Concrete": 1.03},
        "ObjectLoc": {"Abstract": 0.15, "Concrete": 0.18},
        "CombinedBasic": {"Abstract": 1.40, "Concrete": 0.99},
        "SimClr": {"Abstract": 1.15, "Concrete": 0.79},
        "ViT": {"Abstract": 3.71, "Concrete": 6.67},
    },
    "YFCC-500": {
        "Color": {"Abstract": 0.81, "Concrete": 0.65},
        "HOG": {"Abstract": 0.36, "Concrete": 0.44},
        "Texture": {"Abstract": 0.28, "Concrete": 0.27},
        "GIST": {"Abstract": 0.52, "Concrete": 0.56},
        "SURF": {"Abstract": 0.40, "Concrete": 0.38},
        "YOLO": {"Abstract": 1.64, "Concrete": 1.57},
        "ObjectLoc": {"Abstract": 0.24, "Concrete": 0.27},
        "CombinedBasic": {"Abstract": 0.69, "Concrete": 0.75},
        "SimClr": {"Abstract": 0.53, "Concrete": 0.55},
        "ViT": {"Abstract": 2.27, "Concrete": 6.63},
    },
}

# Mean cosine similarity of each image's top 25 neighbors.
MEAN_TOP25_SIMILARITY = {
    "Bing-25": {
        "Color": {"Abstract": 0.91, "Concrete": 0.92},
        "HOG": {"Abstract": 0.78, "Concrete": 0.80},
        "Texture": {"Abstract": 0.99, "Concrete": 0.99},
        "GIST": {"Abstract": 0.91, "Concrete": 0.91},
        "SURF": {"Abstract": 0.61, "Concrete": 0.64},
        "YOLO": {"Abstract": 0.95, "Concrete": 0.89},
        "ObjectLoc": {"Abstract": 0.85, "Concrete": 0.84},
        "CombinedBasic": {"Abstract": 0.98, "Concrete": 0.98},
        "SimClr": {"Abstract": 0.98, "Concrete": 0.98},
        "ViT": {"Abstract": 0.58, "Concrete": 0.56},
    },
    "YFCC-25": {
        "Color": {"Abstract": 0.92, "Concrete": 0.92},
        "HOG": {"Abstract": 0.80, "Concrete": 0.81},
        "Texture": {"Abstract": 0.99, "Concrete": 0.99},
        "GIST": {"Abstract": 0.93, "Concrete": 0.93},
        "SURF": {"Abstract": 0.42, "Concrete": 0.42},
        "YOLO": {"Abstract": 0.91, "Concrete": 0.86},
        "ObjectLoc": {"Abstract": 0.81, "Concrete": 0.80},
        "CombinedBasic": {"Abstract": 0.98, "Concrete": 0.98},
        "SimClr": {"Abstract": 0.99, "Concrete": 0.99},
        "ViT": {"Abstract": 0.56, "Concrete": 0.52},
    },
}

# Rating regression against the crowd-sourced norms (Spearman rho, RMSE).
REGRESSION_REFERENCE = {
    "Bing": {
        "Color": {"rho": 0.52, "rmse": 1.34},
        "HOG": {"rho": 0.24, "rmse": 1.53},
        "Texture": {"rho": 0.42, "rmse": 1.41},
        "GIST": {"rho": 0.38, "rmse": 1.43},
        "SURF": {"rho": 0.49, "rmse": 1.34},
        "YOLO": {"rho": 0.26, "rmse": 1.54},
        "ObjectLoc": {"rho": 0.21, "rmse": 1.67},
        "CombinedBasic": {"rho": 0.63, "rmse": 1.12},
        "SimClr": {"rho": 0.28, "rmse": 1.87},
        "ViT": {"rho": 0.56, "rmse": 1.27},
    },
    "YFCC": {
        "Color": {"rho": 0.16, "rmse": 1.58},
        "HOG": {"rho": 0.12, "rmse": 1.60},
        "Texture": {"rho": 0.17, "rmse": 1.57},
        "GIST": {"rho": 0.07, "rmse": 1.61},
        "SURF": {"rho": 0.07, "rmse": 1.61},
        "YOLO": {"rho": 0.07, "rmse": 1.61},
        "ObjectLoc": {"rho": 0.01, "rmse": 1.62},
        "CombinedBasic": {"rho": 0.30, "rmse": 1.51},
        "SimClr": {"rho": 0.17, "rmse": 1.90},
        "ViT": {"rho": 0.20, "rmse": 1.85},
    },
}

# Annotator agreement on the 18-concept diversity-reason study.
AGREEMENT_ALPHA_REFERENCE = 0.29
