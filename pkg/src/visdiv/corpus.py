"""Corpus ingestion: concreteness norms, image manifests, dedup, and normalization.

Conventions fixed here so every downstream oracle is exact:
  * canonical working image is square RGB uint8 (default side 256)
  * grayscale is luma Y = 0.299 R + 0.587 G + 0.114 B, rounded half-up
  * downscaling is area-average, upscaling is bilinear (per axis)
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ParseError, ValidationError
from .types import ClassLabel

log = logging.getLogger(__name__)

DATASET_TAGS = ("Bing", "YFCC", "Other")

DEFAULT_ABSTRACT_BAND = (1.07, 1.96)
DEFAULT_CONCRETE_BAND = (4.85, 5.00)


@dataclass(frozen=True)
class ConceptEntry:
    lemma: str
    rating: float
    class_label: ClassLabel


@dataclass(frozen=True)
class ImageRecord:
    image_id: str
    lemma: str
    dataset_tag: str
    source_path: str
    width: int
    height: int


@dataclass
class Manifest:
    records: list[ImageRecord]
    per_concept_cap: int
    truncated: int = 0


@dataclass
class DedupResult:
    kept: list[ImageRecord]
    dropped: list[str]
    rejects: list[tuple[str, str]] = field(default_factory=list)


@dataclass
class Partition:
    abstract: dict[str, list[ImageRecord]]
    concrete: dict[str, list[ImageRecord]]
    report: dict


def _check_band(name, band):
    lo, hi = band
    if not (1.0 <= lo <= hi <= 5.0):
        raise ValidationError(f"{name} band {band} must satisfy 1.0 <= lo <= hi <= 5.0")


def label_rating(rating: float, abstract_band=DEFAULT_ABSTRACT_BAND,
                 concrete_band=DEFAULT_CONCRETE_BAND) -> ClassLabel:
    """Pure band-membership labeling; bands are inclusive on both ends."""
    if abstract_band[0] <= rating <= abstract_band[1]:
        return ClassLabel.ABSTRACT
    if concrete_band[0] <= rating <= concrete_band[1]:
        return ClassLabel.CONCRETE
    return ClassLabel.EXCLUDED


def load_norms(path, abstract_band=DEFAULT_ABSTRACT_BAND,
               concrete_band=DEFAULT_CONCRETE_BAND) -> list[ConceptEntry]:
    """Read a `word,concreteness` CSV and label every row by band membership.

    Input order is preserved. Ratings outside [1, 5] and malformed rows are
    hard errors carrying the offending line number.
    """
    _check_band("abstract", abstract_band)
    _check_band("concrete", concrete_band)
    if max(abstract_band[0], concrete_band[0]) <= min(abstract_band[1], concrete_band[1]):
        raise ValidationError(
            f"abstract band {abstract_band} and concrete band {concrete_band} overlap"
        )

    entries: list[ConceptEntry] = []
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header[:2]] != ["word", "concreteness"]:
            raise ParseError(path, 1, "expected header 'word,concreteness'")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2:
                raise ParseError(path, lineno, f"expected 2 columns, got {len(row)}")
            lemma = row[0].strip().lower()
            if not lemma:
                raise ParseError(path, lineno, "empty word")
            try:
                rating = float(row[1])
            except ValueError:
                raise ParseError(path, lineno, f"rating {row[1]!r} is not a number") from None
            if not (1.0 <= rating <= 5.0):
                raise ValidationError(f"{path}:{lineno}: rating {rating} outside [1, 5]")
            entries.append(ConceptEntry(lemma, rating, label_rating(rating, abstract_band, concrete_band)))
    return entries


def load_manifest(path, per_concept_cap: int = 500) -> Manifest:
    """Read a JSON-Lines image manifest, enforcing unique ids and the per-concept cap.

    Records beyond the cap are dropped (first occurrences win) and counted in
    ``Manifest.truncated``.
    """
    if per_concept_cap < 1:
        raise ValidationError(f"per_concept_cap must be positive, got {per_concept_cap}")
    path = Path(path)
    records: list[ImageRecord] = []
    seen_ids: set[str] = set()
    per_concept: dict[str, int] = {}
    truncated = 0
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
                rec = ImageRecord(
                    image_id=str(obj["image_id"]),
                    lemma=str(obj["lemma"]).lower(),
                    dataset_tag=str(obj.get("dataset_tag", "Other")),
                    source_path=str(obj["path"]),
                    width=int(obj["width"]),
                    height=int(obj["height"]),
                )
            except KeyError as exc:
                raise ParseError(path, lineno, f"missing field {exc.args[0]!r}") from None
            if rec.dataset_tag not in DATASET_TAGS:
                raise ParseError(path, lineno, f"dataset_tag {rec.dataset_tag!r} not one of {DATASET_TAGS}")
            if rec.image_id in seen_ids:
                raise ValidationError(f"{path}:{lineno}: duplicate image_id {rec.image_id!r}")
            seen_ids.add(rec.image_id)
            n = per_concept.get(rec.lemma, 0)
            if n >= per_concept_cap:
                truncated += 1
                continue
            per_concept[rec.lemma] = n + 1
            records.append(rec)
    return Manifest(records=records, per_concept_cap=per_concept_cap, truncated=truncated)


def filter_min_size(records, min_side: int = 256):
    """Split records into (kept, dropped) by declared width/height >= min_side."""
    kept = [r for r in records if r.width >= min_side and r.height >= min_side]
    dropped = [r for r in records if not (r.width >= min_side and r.height >= min_side)]
    return kept, dropped


def decode_image(path) -> np.ndarray:
    """Decode any image file to an H x W x 3 uint8 RGB array."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def dedup_exact(records, loader=decode_image) -> DedupResult:
    """Drop images whose decoded RGB buffers are byte-identical to an earlier
    image of the same concept. First occurrence wins. Undecodable images are
    skipped with a warning and listed in ``rejects``.
    """
    kept: list[ImageRecord] = []
    dropped: list[str] = []
    rejects: list[tuple[str, str]] = []
    seen: set[tuple[str, bytes]] = set()
    for rec in records:
        try:
            buf = loader(rec.source_path)
        except Exception as exc:
            log.warning("could not decode %s (%s): %s", rec.image_id, rec.source_path, exc)
            rejects.append((rec.image_id, f"undecodable: {exc}"))
            continue
        digest = hashlib.sha256(np.ascontiguousarray(buf, dtype=np.uint8).tobytes()).digest()
        key = (rec.lemma, digest)
        if key in seen:
            dropped.append(rec.image_id)
        else:
            seen.add(key)
            kept.append(rec)
    return DedupResult(kept=kept, dropped=dropped, rejects=rejects)


def _area_reduce_axis(arr: np.ndarray, out_len: int) -> np.ndarray:
    """Exact 1-D area average along axis 0 (arbitrary ratio, float math)."""
    n = arr.shape[0]
    csum = np.concatenate([np.zeros((1,) + arr.shape[1:]), np.cumsum(arr, axis=0)], axis=0)
    padded = np.concatenate([arr, np.zeros((1,) + arr.shape[1:])], axis=0)
    edges = np.arange(out_len + 1) * (n / out_len)
    k = np.minimum(np.floor(edges).astype(np.int64), n)
    frac = edges - k
    shape = (-1,) + (1,) * (arr.ndim - 1)
    integral = csum[k] + frac.reshape(shape) * padded[k]
    return (integral[1:] - integral[:-1]) * (out_len / n)


def _bilinear_expand_axis(arr: np.ndarray, out_len: int) -> np.ndarray:
    """1-D bilinear interpolation along axis 0, pixel centers aligned."""
    n = arr.shape[0]
    pos = (np.arange(out_len) + 0.5) * (n / out_len) - 0.5
    pos = np.clip(pos, 0.0, n - 1.0)
    lo = np.floor(pos).astype(np.int64)
    hi = np.minimum(lo + 1, n - 1)
    w = (pos - lo).reshape((-1,) + (1,) * (arr.ndim - 1))
    return arr[lo] * (1.0 - w) + arr[hi] * w


def _resample_axis(arr: np.ndarray, out_len: int) -> np.ndarray:
    n = arr.shape[0]
    if out_len == n:
        return arr
    if out_len < n:
        return _area_reduce_axis(arr, out_len)
    return _bilinear_expand_axis(arr, out_len)


def normalize_image(img: np.ndarray, target_side: int) -> np.ndarray:
    """Resize to target_side x target_side RGB uint8. Area-average when an axis
    shrinks, bilinear when it grows; one half-up rounding at the very end.
    """
    if target_side < 1:
        raise ValidationError(f"target_side must be positive, got {target_side}")
    img = np.asarray(img)
    if img.ndim == 2:
        img = np.stack([img] * 3, axis=-1)
    if img.ndim != 3 or img.shape[2] not in (1, 3):
        raise ValidationError(f"expected HxWx{{1,3}} image, got shape {img.shape}")
    if img.shape[2] == 1:
        img = np.repeat(img, 3, axis=2)
    if img.shape[0] == 0 or img.shape[1] == 0:
        raise ValidationError("zero-area image")
    if img.shape[0] == target_side and img.shape[1] == target_side and img.dtype == np.uint8:
        return img.copy()
    work = img.astype(np.float64)
    work = _resample_axis(work, target_side)
    work = np.swapaxes(_resample_axis(np.swapaxes(work, 0, 1), target_side), 0, 1)
    return np.clip(np.floor(work + 0.5), 0, 255).astype(np.uint8)


def to_gray(img: np.ndarray) -> np.ndarray:
    """RGB -> 8-bit grayscale via luma 0.299/0.587/0.114, rounded half-up."""
    img = np.asarray(img)
    if img.ndim == 2:
        return img.astype(np.uint8)
    y = img[..., 0] * 0.299 + img[..., 1] * 0.587 + img[..., 2] * 0.114
    return np.clip(np.floor(y + 0.5), 0, 255).astype(np.uint8)


def partition_manifest(manifest: Manifest, norms, min_images: int = 25) -> Partition:
    """Split manifest records into Abstract/Concrete concept groups.

    Unresolvable lemmas, Excluded concepts, and concepts with fewer than
    ``min_images`` images are soft-dropped and counted in the report.
    """
    by_lemma: dict[str, ClassLabel] = {e.lemma: e.class_label for e in norms}
    groups: dict[str, list[ImageRecord]] = {}
    unresolved: list[str] = []
    for rec in manifest.records:
        if rec.lemma not in by_lemma:
            if rec.lemma not in unresolved:
                unresolved.append(rec.lemma)
            continue
        groups.setdefault(rec.lemma, []).append(rec)

    abstract: dict[str, list[ImageRecord]] = {}
    concrete: dict[str, list[ImageRecord]] = {}
    excluded = 0
    too_few = {ClassLabel.ABSTRACT.value: 0, ClassLabel.CONCRETE.value: 0}
    for lemma, recs in groups.items():
        label = by_lemma[lemma]
        if label is ClassLabel.EXCLUDED:
            excluded += 1
            continue
        if len(recs) < min_images:
            too_few[label.value] += 1
            continue
        (abstract if label is ClassLabel.ABSTRACT else concrete)[lemma] = recs

    report = {
        "unresolved_lemmas": unresolved,
        "excluded_concepts": excluded,
        "too_few_images": too_few,
        "kept": {
            ClassLabel.ABSTRACT.value: len(abstract),
            ClassLabel.CONCRETE.value: len(concrete),
        },
        "min_images": min_images,
    }
    return Partition(abstract=abstract, concrete=concrete, report=report)
