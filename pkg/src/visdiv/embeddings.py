"""Load and validate externally computed dense embeddings (ViT, SimClr).

Two interchangeable formats:
  * binary: magic "VDEM", version byte, model_tag (u16 length + bytes),
    dim (u32), row count (u64), then rows of (u16 id length + bytes,
    dim little-endian f32)
  * JSON Lines `{"image_id","values":[...]}` with a sidecar header file
    `<file>.header.json` holding `{"model_tag","dim"}`
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .types import Attribute, FeatureVector

EMBEDDING_MAGIC = b"VDEM"
EMBEDDING_VERSION = 1

# The extraction layer is pinned: class-token embedding for ViT-Base (768),
# pooled backbone features for SimClr ResNet-50 (2048).
DEFAULT_DIMS = {Attribute.VIT: 768, Attribute.SIMCLR: 2048}


@dataclass
class EmbeddingFile:
    model_tag: str
    dim: int
    rows: dict[str, np.ndarray]          # image_id -> float32 vector


def attribute_for_tag(model_tag: str) -> Attribute:
    tag = model_tag.lower()
    if tag.startswith("vit"):
        return Attribute.VIT
    if tag.startswith("simclr"):
        return Attribute.SIMCLR
    raise ValidationError(
        f"model_tag {model_tag!r} does not name a known embedding family (vit*/simclr*)"
    )


def _check_row(image_id: str, values: np.ndarray, dim: int, seen: set, source: str):
    if image_id in seen:
        raise ValidationError(f"{source}: duplicate image_id {image_id!r}")
    if values.shape != (dim,):
        raise ValidationError(
            f"{source}: row for {image_id!r} has {values.shape[0]} values, expected {dim}"
        )
    if not np.all(np.isfinite(values)):
        raise ValidationError(f"{source}: row for {image_id!r} has NaN/Inf values")
    seen.add(image_id)


def write_embeddings_binary(path, emb: EmbeddingFile) -> None:
    path = Path(path)
    tag = emb.model_tag.encode("utf-8")
    with path.open("wb") as fh:
        fh.write(EMBEDDING_MAGIC)
        fh.write(struct.pack("<BH", EMBEDDING_VERSION, len(tag)))
        fh.write(tag)
        fh.write(struct.pack("<IQ", emb.dim, len(emb.rows)))
        for image_id, values in emb.rows.items():
            row = np.ascontiguousarray(values, dtype="<f4")
            if row.shape != (emb.dim,):
                raise ValidationError(
                    f"row for {image_id!r} has {row.shape[0]} values, expected {emb.dim}")
            ib = image_id.encode("utf-8")
            fh.write(struct.pack("<H", len(ib)))
            fh.write(ib)
            fh.write(row.tobytes())


def read_embeddings_binary(path) -> EmbeddingFile:
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] != EMBEDDING_MAGIC:
        raise ValidationError(f"{path}: not an embedding file (bad magic)")
    version, tag_len = struct.unpack_from("<BH", raw, 4)
    if version != EMBEDDING_VERSION:
        raise ValidationError(f"{path}: unsupported version {version}")
    off = 7
    model_tag = raw[off:off + tag_len].decode("utf-8")
    off += tag_len
    dim, count = struct.unpack_from("<IQ", raw, off)
    off += 12
    if dim < 1:
        raise ValidationError(f"{path}: non-positive dim {dim}")
    rows: dict[str, np.ndarray] = {}
    seen: set[str] = set()
    for _ in range(count):
        if off + 2 > len(raw):
            raise ValidationError(f"{path}: truncated row table")
        (id_len,) = struct.unpack_from("<H", raw, off)
        off += 2
        if off + id_len + 4 * dim > len(raw):
            raise ValidationError(f"{path}: truncated row table")
        try:
            image_id = raw[off:off + id_len].decode("utf-8")
        except UnicodeDecodeError:
            raise ValidationError(f"{path}: corrupt image id at offset {off}") from None
        off += id_len
        values = np.frombuffer(raw, dtype="<f4", count=dim, offset=off).copy()
        off += 4 * dim
        _check_row(image_id, values, dim, seen, str(path))
        rows[image_id] = values
    if off != len(raw):
        raise ValidationError(f"{path}: {len(raw) - off} trailing bytes")
    return EmbeddingFile(model_tag=model_tag, dim=dim, rows=rows)


def write_embeddings_jsonl(path, emb: EmbeddingFile) -> None:
    path = Path(path)
    header = {"model_tag": emb.model_tag, "dim": emb.dim}
    Path(str(path) + ".header.json").write_text(json.dumps(header), encoding="utf-8")
    with path.open("w", encoding="utf-8") as fh:
        for image_id, values in emb.rows.items():
            fh.write(json.dumps({"image_id": image_id,
                                 "values": [float(v) for v in values]}) + "\n")


def read_embeddings_jsonl(path) -> EmbeddingFile:
    path = Path(path)
    header_path = Path(str(path) + ".header.json")
    if not header_path.exists():
        raise ValidationError(f"{path}: missing sidecar header {header_path.name}")
    header = json.loads(header_path.read_text(encoding="utf-8"))
    dim = int(header["dim"])
    rows: dict[str, np.ndarray] = {}
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                image_id = str(obj["image_id"])
                values = np.asarray(obj["values"], dtype="<f4")
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ParseError(path, lineno, f"bad embedding row: {exc}") from None
            _check_row(image_id, values, dim, seen, f"{path}:{lineno}")
            rows[image_id] = values
    return EmbeddingFile(model_tag=str(header["model_tag"]), dim=dim, rows=rows)


def read_embeddings(path) -> EmbeddingFile:
    """Dispatch on the magic bytes: binary VDEM or JSON-Lines with sidecar."""
    path = Path(path)
    with path.open("rb") as fh:
        magic = fh.read(4)
    if magic == EMBEDDING_MAGIC:
        return read_embeddings_binary(path)
    return read_embeddings_jsonl(path)


def ingest_embeddings(path, expected_dim: int | None = None) -> dict[str, FeatureVector]:
    """Load an embedding file into FeatureVectors, enforcing the dim check
    when ``expected_dim`` is given. Hard errors on dim mismatch, duplicate
    ids, and non-finite values.
    """
    emb = read_embeddings(path)
    attribute = attribute_for_tag(emb.model_tag)
    if expected_dim is not None and emb.dim != expected_dim:
        raise ValidationError(
            f"{path}: dim {emb.dim} does not match expected {expected_dim} for {emb.model_tag!r}"
        )
    return {
        image_id: FeatureVector(image_id, attribute, values.astype(np.float64))
        for image_id, values in emb.rows.items()
    }
