"""Embedding encoders.

Two production models and two small stand-ins sharing the same code paths:

  vit-b16      ViT-Base/16 class-token embedding, 768-d, 224px input
  simclr-r50   ResNet-50 global-pooled backbone features, 2048-d
  vit-tiny     2-layer ViT on 64px input, 64-d (fast schema/round-trip checks)
  simclr-r18   ResNet-18 pooled features, 512-d

Without a checkpoint the weights are randomly initialized from the given seed,
which is enough for schema work and deterministic smoke runs; real analyses
should pass --checkpoint. Inference runs in eval mode and is deterministic for
fixed inputs, seed, and thread count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import torch
import torchvision

from .manifest import to_model_tensor


@dataclass
class Encoder:
    model_tag: str
    dim: int
    input_side: int
    _forward: Callable[[torch.Tensor], torch.Tensor]

    def preprocess(self, img) -> torch.Tensor:
        return to_model_tensor(img, self.input_side)

    @torch.no_grad()
    def encode(self, batch: torch.Tensor) -> torch.Tensor:
        return self._forward(batch)


def _load_state(model: torch.nn.Module, checkpoint: str) -> None:
    state = torch.load(checkpoint, map_location="cpu")
    if isinstance(state, dict) and "state_dict" in state:
        state = state["state_dict"]
    cleaned = {}
    for key, value in state.items():
        for prefix in ("module.", "backbone.", "encoder."):
            if key.startswith(prefix):
                key = key[len(prefix):]
        cleaned[key] = value
    missing, unexpected = model.load_state_dict(cleaned, strict=False)
    # classifier heads are unused here (fc replaced / class token taken before heads)
    problems = sorted(n for n in list(missing) + list(unexpected)
                      if not n.startswith(("fc.", "heads.")))
    if problems:
        raise ValueError(f"checkpoint does not match the model: {problems[:8]}")


def _vit_class_token(model: torchvision.models.VisionTransformer):
    def forward(x: torch.Tensor) -> torch.Tensor:
        feats = model._process_input(x)
        cls = model.class_token.expand(feats.shape[0], -1, -1)
        feats = model.encoder(torch.cat([cls, feats], dim=1))
        return feats[:, 0]
    return forward


def _resnet_pooled(model) -> Callable[[torch.Tensor], torch.Tensor]:
    model.fc = torch.nn.Identity()
    return model


def build_encoder(model_tag: str, seed: int = 0, checkpoint: str | None = None,
                  device: str = "cpu") -> Encoder:
    torch.manual_seed(seed)
    tag = model_tag.lower()
    if tag == "vit-b16":
        model = torchvision.models.vit_b_16(weights=None)
        dim, side, forward_builder = 768, 224, _vit_class_token
    elif tag == "vit-tiny":
        model = torchvision.models.VisionTransformer(
            image_size=64, patch_size=16, num_layers=2, num_heads=2,
            hidden_dim=64, mlp_dim=128)
        dim, side, forward_builder = 64, 64, _vit_class_token
    elif tag == "simclr-r50":
        model = torchvision.models.resnet50(weights=None)
        dim, side, forward_builder = 2048, 224, None
    elif tag == "simclr-r18":
        model = torchvision.models.resnet18(weights=None)
        dim, side, forward_builder = 512, 64, None
    else:
        raise ValueError(f"unknown embedding model {model_tag!r}; "
                         "expected one of vit-b16, vit-tiny, simclr-r50, simclr-r18")
    if checkpoint:
        _load_state(model, checkpoint)
    model.eval()
    model.to(device)
    forward = _resnet_pooled(model) if forward_builder is None else forward_builder(model)
    return Encoder(model_tag=model_tag, dim=dim, input_side=side, _forward=forward)


EMBEDDING_MODELS = ("vit-b16", "vit-tiny", "simclr-r50", "simclr-r18")
