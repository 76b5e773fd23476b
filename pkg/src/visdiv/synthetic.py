"""Procedural texture corpora for end-to-end checks and demos.

Two concept populations: "tight" concepts draw one texture recipe per concept
and only jitter it per image (low intra-concept visual variance, rated
concrete), while "loose" concepts redraw the full recipe for every image
(high variance, rated abstract). Detections follow the same logic: stable
class and location for tight concepts, random for loose ones.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

CLASS_NAMES = [f"obj{c}" for c in "ABCDEFGHIJKL"]
HYPERNYMS = ["artifact", "organism", "structure", "substance", "pattern"]


def _texture(rng: np.random.Generator, side: int, recipe: dict) -> np.ndarray:
    y, x = np.mgrid[0:side, 0:side].astype(np.float64)
    kind = recipe["kind"]
    if kind == "grating":
        t = x * np.cos(recipe["angle"]) + y * np.sin(recipe["angle"])
        val = 0.5 + 0.5 * np.sin(2 * np.pi * recipe["freq"] * t / side + recipe["phase"])
    elif kind == "checker":
        b = recipe["block"]
        val = (((x // b) + (y // b)) % 2)
    elif kind == "blobs":
        val = np.zeros((side, side))
        for cx, cy, s in recipe["spots"]:
            val += np.exp(-((x - cx * side) ** 2 + (y - cy * side) ** 2) / (2 * (s * side) ** 2))
        val = np.clip(val, 0, 1)
    else:  # stripes
        t = x * np.cos(recipe["angle"]) + y * np.sin(recipe["angle"])
        val = (np.sin(2 * np.pi * recipe["freq"] * t / side + recipe["phase"]) > 0).astype(np.float64)
    c0 = np.asarray(recipe["color0"], dtype=np.float64)
    c1 = np.asarray(recipe["color1"], dtype=np.float64)
    img = c0[None, None, :] * (1 - val[..., None]) + c1[None, None, :] * val[..., None]
    img += rng.normal(0, recipe.get("noise", 2.0), img.shape)
    return np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)


def _draw_recipe(rng: np.random.Generator) -> dict:
    kind = ["grating", "checker", "blobs", "stripes"][rng.integers(4)]
    recipe = {
        "kind": kind,
        "color0": rng.integers(0, 256, 3).tolist(),
        "color1": rng.integers(0, 256, 3).tolist(),
        "angle": float(rng.uniform(0, np.pi)),
        "freq": float(rng.uniform(2, 12)),
        "phase": float(rng.uniform(0, 2 * np.pi)),
        "block": int(rng.integers(3, 12)),
        "noise": 2.0,
    }
    if kind == "blobs":
        recipe["spots"] = [(float(rng.uniform(0.15, 0.85)), float(rng.uniform(0.15, 0.85)),
                            float(rng.uniform(0.04, 0.12)))
                           for _ in range(int(rng.integers(2, 6)))]
    return recipe


def _jitter_recipe(base: dict, rng: np.random.Generator) -> dict:
    recipe = dict(base)
    recipe["phase"] = float(base.get("phase", 0.0) + rng.uniform(-0.3, 0.3))
    recipe["freq"] = float(base.get("freq", 6.0) * rng.uniform(0.97, 1.03))
    if base["kind"] == "blobs":
        recipe["spots"] = [(cx + float(rng.uniform(-0.02, 0.02)),
                            cy + float(rng.uniform(-0.02, 0.02)), s)
                           for cx, cy, s in base["spots"]]
    return recipe


def generate_corpus(root, concepts_per_class: int = 12, images_per_concept: int = 25,
                    side: int = 64, seed: int = 0, with_excluded: bool = True) -> dict:
    """Write a complete synthetic corpus under ``root``.

    Returns the paths of everything a pipeline run needs: manifest, norms,
    detections, hypernym map, and the image directory.
    """
    root = Path(root)
    images_dir = root / "images"
    images_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF])))

    manifest_rows: list[dict] = []
    norm_rows: list[tuple[str, float]] = []
    detection_rows: list[dict] = []

    def emit_concept(lemma: str, rating: float, tight: bool, n_images: int):
        norm_rows.append((lemma, rating))
        base = _draw_recipe(rng)
        stable_class = CLASS_NAMES[int(rng.integers(len(CLASS_NAMES)))]
        stable_box = rng.uniform(0.15, 0.55, 2)
        for i in range(n_images):
            recipe = _jitter_recipe(base, rng) if tight else _draw_recipe(rng)
            img = _texture(rng, side, recipe)
            image_id = f"{lemma}-{i:03d}"
            path = images_dir / f"{image_id}.png"
            Image.fromarray(img).save(path)
            manifest_rows.append({
                "image_id": image_id, "lemma": lemma, "dataset_tag": "Other",
                "path": str(path), "width": side, "height": side,
            })
            if tight:
                x0 = float(np.clip(stable_box[0] + rng.uniform(-0.02, 0.02), 0.0, 0.6))
                y0 = float(np.clip(stable_box[1] + rng.uniform(-0.02, 0.02), 0.0, 0.6))
                detection_rows.append({
                    "image_id": image_id,
                    "class_id": CLASS_NAMES.index(stable_class),
                    "class_name": stable_class,
                    "bbox": [x0, y0, x0 + 0.3, y0 + 0.3],
                    "confidence": float(rng.uniform(0.85, 0.95)),
                })
            else:
                for _ in range(int(rng.integers(0, 3))):
                    x0, y0 = rng.uniform(0.0, 0.7, 2)
                    w, h = rng.uniform(0.1, 0.3, 2)
                    cls = int(rng.integers(len(CLASS_NAMES)))
                    detection_rows.append({
                        "image_id": image_id,
                        "class_id": cls,
                        "class_name": CLASS_NAMES[cls],
                        "bbox": [float(x0), float(y0), float(min(x0 + w, 1.0)), float(min(y0 + h, 1.0))],
                        "confidence": float(rng.uniform(0.3, 1.0)),
                    })

    for i in range(concepts_per_class):
        emit_concept(f"conc{i:02d}", round(float(rng.uniform(4.86, 5.0)), 2), True, images_per_concept)
    for i in range(concepts_per_class):
        emit_concept(f"abst{i:02d}", round(float(rng.uniform(1.1, 1.9)), 2), False, images_per_concept)
    if with_excluded:
        emit_concept("middling", 3.0, True, 2)

    hyp_path = root / "hypernyms.csv"
    lines = ["class_name,hypernym_id,hypernym_name"]
    for i, name in enumerate(CLASS_NAMES):
        hid = i % len(HYPERNYMS)
        lines.append(f"{name},{hid},{HYPERNYMS[hid]}")
    hyp_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    norms_path = root / "norms.csv"
    norms_path.write_text(
        "word,concreteness\n" + "\n".join(f"{w},{r}" for w, r in norm_rows) + "\n",
        encoding="utf-8")

    manifest_path = root / "manifest.jsonl"
    with manifest_path.open("w", encoding="utf-8") as fh:
        for row in manifest_rows:
            fh.write(json.dumps(row) + "\n")

    detections_path = root / "detections.jsonl"
    with detections_path.open("w", encoding="utf-8") as fh:
        for row in detection_rows:
            fh.write(json.dumps(row) + "\n")

    return {
        "manifest": str(manifest_path),
        "norms": str(norms_path),
        "detections": str(detections_path),
        "hypernyms": str(hyp_path),
        "images_dir": str(images_dir),
    }
