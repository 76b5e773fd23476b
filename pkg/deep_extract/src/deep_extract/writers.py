"""Export file formats shared with the analysis toolkit.

Embeddings, binary: magic "VDEM", version byte 1, model_tag (u16 length +
UTF-8 bytes), dim (u32), row count (u64), then per row (u16 id length + bytes,
dim little-endian float32). JSON-Lines alternative:
`{"image_id","values":[...]}` with sidecar `<file>.header.json` carrying
`{"model_tag","dim"}`.

Detections: JSON Lines `{"image_id","class_id","class_name",
"bbox":[x0,y0,x1,y1],"confidence"}` with bbox normalized to [0, 1].
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

EMBEDDING_MAGIC = b"VDEM"
EMBEDDING_VERSION = 1


def write_embeddings_binary(path, model_tag: str, dim: int, rows) -> int:
    """rows: iterable of (image_id, float32 array). Returns rows written."""
    path = Path(path)
    rows = list(rows)
    tag = model_tag.encode("utf-8")
    with path.open("wb") as fh:
        fh.write(EMBEDDING_MAGIC)
        fh.write(struct.pack("<BH", EMBEDDING_VERSION, len(tag)))
        fh.write(tag)
        fh.write(struct.pack("<IQ", dim, len(rows)))
        for image_id, values in rows:
            row = np.ascontiguousarray(values, dtype="<f4")
            if row.shape != (dim,):
                raise ValueError(f"row for {image_id!r} has shape {row.shape}, expected ({dim},)")
            ib = image_id.encode("utf-8")
            fh.write(struct.pack("<H", len(ib)))
            fh.write(ib)
            fh.write(row.tobytes())
    return len(rows)


def write_embeddings_jsonl(path, model_tag: str, dim: int, rows) -> int:
    path = Path(path)
    rows = list(rows)
    Path(str(path) + ".header.json").write_text(
        json.dumps({"model_tag": model_tag, "dim": dim}), encoding="utf-8")
    with path.open("w", encoding="utf-8") as fh:
        for image_id, values in rows:
            row = np.ascontiguousarray(values, dtype="<f4")
            if row.shape != (dim,):
                raise ValueError(f"row for {image_id!r} has shape {row.shape}, expected ({dim},)")
            fh.write(json.dumps({"image_id": image_id,
                                 "values": [float(v) for v in row]}) + "\n")
    return len(rows)


def write_detections_jsonl(path, rows) -> int:
    """rows: iterable of (image_id, RawDetection)."""
    path = Path(path)
    n = 0
    with path.open("w", encoding="utf-8") as fh:
        for image_id, det in rows:
            x0, y0, x1, y1 = det.bbox
            if not (0.0 <= x0 < x1 <= 1.0 and 0.0 <= y0 < y1 <= 1.0):
                raise ValueError(f"invalid bbox for {image_id!r}: {det.bbox}")
            fh.write(json.dumps({
                "image_id": image_id,
                "class_id": det.class_id,
                "class_name": det.class_name,
                "bbox": [x0, y0, x1, y1],
                "confidence": det.confidence,
            }) + "\n")
            n += 1
    return n


def write_rejects(path, rejects) -> None:
    """Sidecar rejects file: JSON Lines `{"image_id","reason"}`."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for image_id, reason in rejects:
            fh.write(json.dumps({"image_id": image_id, "reason": reason}) + "\n")
