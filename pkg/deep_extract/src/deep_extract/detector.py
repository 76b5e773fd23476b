"""Object detectors behind a single (class, bbox, confidence) interface.

  fasterrcnn-r50   torchvision Faster R-CNN with the COCO class list; pass a
                   checkpoint for real detections
  blob             classical bright/dark region detector, no weights needed;
                   deterministic and fast, used for schema checks and demos

Boxes are normalized to [0, 1] with x0 < x1 and y0 < y1; detections violating
that (degenerate boxes after clipping) are dropped before export.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
import torchvision

COCO_CLASSES = [
    "__background__", "person", "bicycle", "car", "motorcycle", "airplane", "bus",
    "train", "truck", "boat", "traffic light", "fire hydrant", "N/A", "stop sign",
    "parking meter", "bench", "bird", "cat", "dog", "horse", "sheep", "cow",
    "elephant", "bear", "zebra", "giraffe", "N/A", "backpack", "umbrella", "N/A",
    "N/A", "handbag", "tie", "suitcase", "frisbee", "skis", "snowboard",
    "sports ball", "kite", "baseball bat", "baseball glove", "skateboard",
    "surfboard", "tennis racket", "bottle", "N/A", "wine glass", "cup", "fork",
    "knife", "spoon", "bowl", "banana", "apple", "sandwich", "orange", "broccoli",
    "carrot", "hot dog", "pizza", "donut", "cake", "chair", "couch",
    "potted plant", "bed", "N/A", "dining table", "N/A", "N/A", "toilet", "N/A",
    "tv", "laptop", "mouse", "remote", "keyboard", "cell phone", "microwave",
    "oven", "toaster", "sink", "refrigerator", "N/A", "book", "clock", "vase",
    "scissors", "teddy bear", "hair drier", "toothbrush",
]


@dataclass(frozen=True)
class RawDetection:
    class_id: int
    class_name: str
    bbox: tuple[float, float, float, float]
    confidence: float


class BlobDetector:
    """Connected regions that deviate from the image mean by more than one
    standard deviation. Constant images produce no detections."""

    model_tag = "blob"
    class_names = ["blob"]

    def __init__(self, min_area_fraction: float = 0.001):
        self.min_area_fraction = min_area_fraction

    def detect(self, img: np.ndarray) -> list[RawDetection]:
        gray = img.astype(np.float64).mean(axis=2)
        h, w = gray.shape
        std = gray.std()
        if std == 0.0:
            return []
        mask = np.abs(gray - gray.mean()) > std
        labels = _label_components(mask)
        out: list[RawDetection] = []
        for comp in range(1, labels.max() + 1):
            ys, xs = np.nonzero(labels == comp)
            if len(ys) < self.min_area_fraction * h * w:
                continue
            x0, x1 = xs.min() / w, (xs.max() + 1) / w
            y0, y1 = ys.min() / h, (ys.max() + 1) / h
            if not (x0 < x1 and y0 < y1):
                continue
            strength = float(np.abs(gray[ys, xs] - gray.mean()).mean() / (3.0 * std))
            out.append(RawDetection(0, "blob", (x0, y0, x1, y1),
                                    float(np.clip(strength, 0.0, 1.0))))
        out.sort(key=lambda d: (-d.confidence, d.bbox))
        return out


def _label_components(mask: np.ndarray) -> np.ndarray:
    """4-connected component labeling (iterative flood fill)."""
    labels = np.zeros(mask.shape, dtype=np.int64)
    current = 0
    h, w = mask.shape
    for sy, sx in zip(*np.nonzero(mask)):
        if labels[sy, sx]:
            continue
        current += 1
        stack = [(sy, sx)]
        labels[sy, sx] = current
        while stack:
            y, x = stack.pop()
            for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
                if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and not labels[ny, nx]:
                    labels[ny, nx] = current
                    stack.append((ny, nx))
    return labels


class TorchvisionDetector:
    model_tag = "fasterrcnn-r50"
    class_names = COCO_CLASSES

    def __init__(self, seed: int = 0, checkpoint: str | None = None,
                 device: str = "cpu", min_size: int = 224):
        torch.manual_seed(seed)
        self.model = torchvision.models.detection.fasterrcnn_resnet50_fpn(
            weights=None, weights_backbone=None, min_size=min_size, max_size=2 * min_size)
        if checkpoint:
            state = torch.load(checkpoint, map_location="cpu")
            if isinstance(state, dict) and "state_dict" in state:
                state = state["state_dict"]
            self.model.load_state_dict(state)
        self.model.eval()
        self.model.to(device)
        self.device = device

    @torch.no_grad()
    def detect(self, img: np.ndarray) -> list[RawDetection]:
        h, w = img.shape[:2]
        x = torch.from_numpy(img.astype(np.float32) / 255.0).permute(2, 0, 1).to(self.device)
        pred = self.model([x])[0]
        out: list[RawDetection] = []
        for box, label, score in zip(pred["boxes"].cpu().numpy(),
                                     pred["labels"].cpu().numpy(),
                                     pred["scores"].cpu().numpy()):
            x0, y0, x1, y1 = box
            x0, x1 = max(0.0, x0 / w), min(1.0, x1 / w)
            y0, y1 = max(0.0, y0 / h), min(1.0, y1 / h)
            if not (x0 < x1 and y0 < y1):
                continue
            class_id = int(label)
            name = COCO_CLASSES[class_id] if class_id < len(COCO_CLASSES) else f"class_{class_id}"
            out.append(RawDetection(class_id, name, (float(x0), float(y0), float(x1), float(y1)),
                                    float(score)))
        return out


DETECTOR_MODELS = ("blob", "fasterrcnn-r50")


def build_detector(model_tag: str, seed: int = 0, checkpoint: str | None = None,
                   device: str = "cpu"):
    tag = model_tag.lower()
    if tag == "blob":
        return BlobDetector()
    if tag == "fasterrcnn-r50":
        return TorchvisionDetector(seed=seed, checkpoint=checkpoint, device=device)
    raise ValueError(f"unknown detector {model_tag!r}; expected one of {DETECTOR_MODELS}")
