"""Object-detection derived signals: hypernym-reduced class counts, an
overlapping spatial grid, and availability statistics.

Detections are produced externally (see the detections file schema below);
this module never runs a detector.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ParseError, ValidationError
from ..types import Attribute, FeatureVector

GRID_SIDE = 10
GRID_DENOM = GRID_SIDE + 1      # stride 1/11, cell side 2/11: adjacent cells overlap
DEFAULT_CONF_MIN = 0.5
DEFAULT_CLASS_COUNT = 9418
DEFAULT_HYPERNYM_COUNT = 1401


@dataclass(frozen=True)
class Detection:
    image_id: str
    class_id: int
    class_name: str
    bbox: tuple[float, float, float, float]   # (x0, y0, x1, y1) normalized
    confidence: float


@dataclass
class DetectionIndex:
    """Detections grouped per image; absent images map to empty lists."""

    per_image: dict[str, list[Detection]] = field(default_factory=dict)
    rejected: int = 0

    def for_image(self, image_id: str) -> list[Detection]:
        return self.per_image.get(image_id, [])


@dataclass
class HypernymMap:
    """Total mapping from detector class names to hypernym ids."""

    entries: dict[str, int]
    hypernym_names: list[str]

    @property
    def num_hypernyms(self) -> int:
        return len(self.hypernym_names)


def _valid_bbox(bbox) -> bool:
    x0, y0, x1, y1 = bbox
    return (0.0 <= x0 < x1 <= 1.0) and (0.0 <= y0 < y1 <= 1.0)


def ingest_detections(path, class_count: int = DEFAULT_CLASS_COUNT) -> DetectionIndex:
    """Read a detections JSON-Lines file and group records per image.

    Malformed records are hard errors with a line number. Records violating
    the numeric invariants (bbox ordering/range, confidence, class_id) are
    rejected and counted.
    """
    path = Path(path)
    index = DetectionIndex()
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, lineno, f"invalid JSON: {exc.msg}")
            try:
                det = Detection(
                    image_id=str(obj["image_id"]),
                    class_id=int(obj["class_id"]),
                    class_name=str(obj["class_name"]),
                    bbox=tuple(float(v) for v in obj["bbox"]),
                    confidence=float(obj["confidence"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(path, lineno, f"bad detection record: {exc}") from None
            if len(det.bbox) != 4:
                raise ParseError(path, lineno, f"bbox must have 4 entries, got {len(det.bbox)}")
            if (not _valid_bbox(det.bbox) or not (0.0 <= det.confidence <= 1.0)
                    or not (0 <= det.class_id < class_count)):
                index.rejected += 1
                continue
            index.per_image.setdefault(det.image_id, []).append(det)
    return index


def load_hypernym_map(path) -> HypernymMap:
    """Read a `class_name,hypernym_id,hypernym_name` CSV."""
    path = Path(path)
    entries: dict[str, int] = {}
    names: dict[int, str] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header[:3]] != [
                "class_name", "hypernym_id", "hypernym_name"]:
            raise ParseError(path, 1, "expected header 'class_name,hypernym_id,hypernym_name'")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 3:
                raise ParseError(path, lineno, f"expected 3 columns, got {len(row)}")
            name = row[0].strip()
            try:
                hid = int(row[1])
            except ValueError:
                raise ParseError(path, lineno, f"hypernym_id {row[1]!r} is not an integer") from None
            if name in entries:
                raise ParseError(path, lineno, f"duplicate class_name {name!r}")
            entries[name] = hid
            names.setdefault(hid, row[2].strip())
    if not entries:
        raise ValidationError(f"{path}: empty hypernym map")
    max_id = max(entries.values())
    if min(entries.values()) < 0:
        raise ValidationError(f"{path}: negative hypernym id")
    hypernym_names = [names.get(i, f"hypernym_{i}") for i in range(max_id + 1)]
    return HypernymMap(entries=entries, hypernym_names=hypernym_names)


def hypernym_counts(dets, hmap: HypernymMap, conf_min: float = DEFAULT_CONF_MIN,
                    image_id: str = "") -> FeatureVector:
    """Raw hypernym count vector of confident detections (counts preserve
    object multiplicity; no normalization).
    """
    counts = np.zeros(hmap.num_hypernyms)
    for det in dets:
        if det.confidence < conf_min:
            continue
        if det.class_name not in hmap.entries:
            raise ValidationError(f"class {det.class_name!r} missing from hypernym map")
        counts[hmap.entries[det.class_name]] += 1.0
    return FeatureVector(image_id, Attribute.YOLO, counts)


def grid_cell_bounds(i: int, j: int) -> tuple[float, float, float, float]:
    """Cell (i, j) spans x in [i/11, (i+2)/11], y in [j/11, (j+2)/11]."""
    return (i / GRID_DENOM, j / GRID_DENOM, (i + 2) / GRID_DENOM, (j + 2) / GRID_DENOM)


def location_grid(dets, image_id: str = "") -> FeatureVector:
    """Count, per overlapping grid cell, the detections whose bbox intersects
    the cell with positive area. Cell index = i * 10 + j (x-major).
    """
    counts = np.zeros(GRID_SIDE * GRID_SIDE)
    for det in dets:
        x0, y0, x1, y1 = det.bbox
        for i in range(GRID_SIDE):
            cx0, _, cx1, _ = grid_cell_bounds(i, 0)
            if min(x1, cx1) <= max(x0, cx0):
                continue
            for j in range(GRID_SIDE):
                _, cy0, _, cy1 = grid_cell_bounds(0, j)
                if min(y1, cy1) > max(y0, cy0):
                    counts[i * GRID_SIDE + j] += 1.0
    return FeatureVector(image_id, Attribute.OBJECT_LOC, counts)


def availability_stats(partition_groups: dict[str, dict[str, list]],
                       index: DetectionIndex) -> dict[str, float]:
    """Mean over concepts of the percentage of images with >= 1 detection,
    per class. ``partition_groups`` maps class name -> {lemma -> records}.
    """
    out: dict[str, float] = {}
    for class_name, concepts in partition_groups.items():
        per_concept = []
        for records in concepts.values():
            if not records:
                continue
            with_det = sum(1 for r in records if index.for_image(r.image_id))
            per_concept.append(100.0 * with_det / len(records))
        out[class_name] = float(np.mean(per_concept)) if per_concept else 0.0
    return out
