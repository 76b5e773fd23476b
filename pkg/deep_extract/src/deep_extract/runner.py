"""Export jobs: run a model over a manifest, write output plus a sidecar
rejects file. Output row order always equals manifest order."""

from __future__ import annotations

from pathlib import Path

import torch

from .detector import DETECTOR_MODELS, build_detector
from .encoders import EMBEDDING_MODELS, build_encoder
from .manifest import load_rgb, read_manifest
from .writers import (
    write_detections_jsonl,
    write_embeddings_binary,
    write_embeddings_jsonl,
    write_rejects,
)


def export_embeddings(manifest_path, out_path, model_tag: str, seed: int = 0,
                      checkpoint: str | None = None, batch_size: int = 8,
                      device: str = "cpu", file_format: str = "binary") -> dict:
    encoder = build_encoder(model_tag, seed=seed, checkpoint=checkpoint, device=device)
    rows = read_manifest(manifest_path)
    out_rows = []
    rejects = []
    batch_ids: list[str] = []
    batch_tensors: list[torch.Tensor] = []

    def flush():
        if not batch_ids:
            return
        stacked = torch.stack(batch_tensors).to(device)
        embedded = encoder.encode(stacked).cpu().numpy()
        for image_id, vec in zip(batch_ids, embedded):
            out_rows.append((image_id, vec))
        batch_ids.clear()
        batch_tensors.clear()

    for row in rows:
        try:
            img = load_rgb(row.path)
        except Exception as exc:
            rejects.append((row.image_id, f"unreadable: {exc}"))
            continue
        batch_ids.append(row.image_id)
        batch_tensors.append(encoder.preprocess(img))
        if len(batch_ids) >= batch_size:
            flush()
    flush()

    writer = write_embeddings_binary if file_format == "binary" else write_embeddings_jsonl
    written = writer(out_path, encoder.model_tag, encoder.dim, out_rows)
    write_rejects(str(out_path) + ".rejects.jsonl", rejects)
    return {"model": encoder.model_tag, "dim": encoder.dim,
            "rows": written, "rejected": len(rejects)}


def export_detections(manifest_path, out_path, model_tag: str, seed: int = 0,
                      checkpoint: str | None = None, conf_min: float = 0.0,
                      device: str = "cpu") -> dict:
    detector = build_detector(model_tag, seed=seed, checkpoint=checkpoint, device=device)
    rows = read_manifest(manifest_path)
    out_rows = []
    rejects = []
    images_with_detections = 0
    for row in rows:
        try:
            img = load_rgb(row.path)
        except Exception as exc:
            rejects.append((row.image_id, f"unreadable: {exc}"))
            continue
        dets = [d for d in detector.detect(img) if d.confidence >= conf_min]
        if dets:
            images_with_detections += 1
        out_rows.extend((row.image_id, d) for d in dets)
    written = write_detections_jsonl(out_path, out_rows)
    write_rejects(str(out_path) + ".rejects.jsonl", rejects)
    return {"model": detector.model_tag, "detections": written,
            "images_with_detections": images_with_detections, "rejected": len(rejects)}


def model_kind(model_tag: str) -> str:
    tag = model_tag.lower()
    if tag in EMBEDDING_MODELS:
        return "embeddings"
    if tag in DETECTOR_MODELS:
        return "detections"
    raise ValueError(
        f"unknown model {model_tag!r}; embedding models: {EMBEDDING_MODELS}, "
        f"detectors: {DETECTOR_MODELS}")


def run(manifest_path, out_path, model_tag: str, **kwargs) -> dict:
    kind = model_kind(model_tag)
    if kind == "embeddings":
        return export_embeddings(manifest_path, out_path, model_tag, **kwargs)
    kwargs.pop("batch_size", None)
    kwargs.pop("file_format", None)
    return export_detections(manifest_path, out_path, model_tag, **kwargs)


def ensure_parent(path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
