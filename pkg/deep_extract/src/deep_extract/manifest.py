"""Manifest reading and image preprocessing.

The manifest is JSON Lines, one object per image:
`{"image_id","lemma","dataset_tag","path","width","height"}`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)


@dataclass(frozen=True)
class ManifestRow:
    image_id: str
    path: str


def read_manifest(path) -> list[ManifestRow]:
    path = Path(path)
    rows: list[ManifestRow] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                row = ManifestRow(str(obj["image_id"]), str(obj["path"]))
            except (json.JSONDecodeError, KeyError) as exc:
                raise ValueError(f"{path}:{lineno}: bad manifest row: {exc}") from None
            if row.image_id in seen:
                raise ValueError(f"{path}:{lineno}: duplicate image_id {row.image_id!r}")
            seen.add(row.image_id)
            rows.append(row)
    return rows


def load_rgb(path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def to_model_tensor(img: np.ndarray, side: int, normalize: bool = True) -> torch.Tensor:
    """HxWx3 uint8 -> normalized float tensor 3 x side x side (bilinear resize)."""
    pil = Image.fromarray(img).resize((side, side), Image.BILINEAR)
    x = torch.from_numpy(np.asarray(pil, dtype=np.float32) / 255.0).permute(2, 0, 1)
    if normalize:
        mean = torch.tensor(IMAGENET_MEAN).view(3, 1, 1)
        std = torch.tensor(IMAGENET_STD).view(3, 1, 1)
        x = (x - mean) / std
    return x
