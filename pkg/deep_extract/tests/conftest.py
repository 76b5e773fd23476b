import json

import numpy as np
import pytest
from PIL import Image


def _blobby(rng, side=64):
    img = np.full((side, side, 3), 60, np.uint8)
    for _ in range(int(rng.integers(1, 4))):
        cx, cy = rng.integers(10, side - 10, 2)
        r = int(rng.integers(4, 9))
        y, x = np.mgrid[0:side, 0:side]
        mask = (x - cx) ** 2 + (y - cy) ** 2 < r * r
        img[mask] = rng.integers(180, 255, 3)
    return img


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    """Ten 64x64 images (one blank) plus a manifest; image 9 reuses file 8."""
    root = tmp_path_factory.mktemp("corpus")
    images = root / "images"
    images.mkdir()
    rng = np.random.default_rng(0)
    rows = []
    paths = []
    for i in range(9):
        img = np.full((64, 64, 3), 127, np.uint8) if i == 0 else _blobby(rng)
        path = images / f"img{i}.png"
        Image.fromarray(img).save(path)
        paths.append(path)
    paths.append(paths[8])      # img9 points at the same file as img8
    for i, path in enumerate(paths):
        rows.append({"image_id": f"img{i:03d}", "lemma": f"c{i % 2}",
                     "dataset_tag": "Other", "path": str(path),
                     "width": 64, "height": 64})
    manifest = root / "manifest.jsonl"
    manifest.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
    return {"root": root, "manifest": manifest, "images": paths}
