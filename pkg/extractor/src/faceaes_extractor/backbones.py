"""CNN backbones producing fixed-width feature vectors.

Each backbone wraps a torchvision architecture truncated at its
penultimate fully-connected (or pooling) layer and exposes one method:
``embed(batch) -> (n, dim) float32``. The reference weights for the
image-quality, image-aesthetics and facial-attribute roles are not
redistributable, so the default backbones are deterministic random
initializations of matching architectures; the exact substitution is
recorded in ``provenance`` and travels into the output manifest.

Inference runs single-threaded under ``no_grad`` so repeated runs give
bit-identical features.
"""

from __future__ import annotations

import numpy as np

_IMAGENET_MEAN = (0.485, 0.456, 0.406)
_IMAGENET_STD = (0.229, 0.224, 0.225)

DEFAULT_SEEDS = {"IQ": 101, "IA": 202, "FA": 303}


class BackboneError(RuntimeError):
    pass


class ImageBackbone:
    """A named feature extractor with a declared output width."""

    def __init__(self, name: str, dim: int, model, forward, provenance: dict):
        self.name = name
        self.dim = int(dim)
        self.provenance = dict(provenance)
        self._model = model
        self._forward = forward

    def embed(self, batch: np.ndarray) -> np.ndarray:
        """Map a (n, h, w, 3) uint8 batch to (n, dim) float32 features.

        Images run through the network one at a time so the result is
        independent of how callers group them; CPU matmul kernels change
        low-order bits with batch size otherwise.
        """
        import torch

        arr = np.asarray(batch)
        if arr.ndim != 4 or arr.shape[3] != 3:
            raise ValueError(f"expected (n, h, w, 3) images, got shape {arr.shape}")
        x = arr.astype(np.float32) / 255.0
        x = (x - np.array(_IMAGENET_MEAN, dtype=np.float32)) / np.array(
            _IMAGENET_STD, dtype=np.float32)
        tensor = torch.from_numpy(np.ascontiguousarray(x.transpose(0, 3, 1, 2)))
        prev_threads = torch.get_num_threads()
        torch.set_num_threads(1)
        try:
            with torch.no_grad():
                rows = [self._forward(self._model, tensor[i : i + 1])
                        for i in range(tensor.shape[0])]
                out = torch.cat(rows, dim=0) if rows else torch.zeros(
                    (0, self.dim))
        finally:
            torch.set_num_threads(prev_threads)
        feats = out.numpy().astype(np.float32)
        if feats.ndim != 2 or feats.shape[1] != self.dim:
            raise BackboneError(
                f"backbone {self.name!r} produced shape {feats.shape}, "
                f"expected (n, {self.dim})"
            )
        return feats


def _alexnet_backbone(name: str, seed: int, role: str) -> ImageBackbone:
    import torch
    from torchvision import models

    torch.manual_seed(seed)
    model = models.alexnet(weights=None)
    model.eval()
    for p in model.parameters():
        p.requires_grad_(False)

    def forward(m, x):
        h = m.features(x)
        h = m.avgpool(h)
        h = torch.flatten(h, 1)
        return m.classifier[:6](h)  # up to the 4096-wide penultimate layer

    provenance = {
        "role": role,
        "family": "torchvision.alexnet",
        "layer": "classifier[5] (penultimate fc, post-relu)",
        "weights": "random-init",
        "seed": seed,
        "dim": 4096,
    }
    return ImageBackbone(name, 4096, model, forward, provenance)


def _resnet50_backbone(name: str, seed: int, role: str) -> ImageBackbone:
    import torch
    from torchvision import models

    torch.manual_seed(seed)
    model = models.resnet50(weights=None)
    model.eval()
    for p in model.parameters():
        p.requires_grad_(False)

    def forward(m, x):
        h = m.conv1(x)
        h = m.bn1(h)
        h = m.relu(h)
        h = m.maxpool(h)
        h = m.layer1(h)
        h = m.layer2(h)
        h = m.layer3(h)
        h = m.layer4(h)
        h = m.avgpool(h)
        return torch.flatten(h, 1)  # 2048-wide pooled features, pre-fc

    provenance = {
        "role": role,
        "family": "torchvision.resnet50",
        "layer": "avgpool (pre-fc)",
        "weights": "random-init",
        "seed": seed,
        "dim": 2048,
    }
    return ImageBackbone(name, 2048, model, forward, provenance)


def make_backbone(name: str, seed: int | None = None) -> ImageBackbone:
    """Build the substitute backbone for one block role (IQ, IA or FA)."""
    if name not in DEFAULT_SEEDS:
        raise ValueError(f"unknown backbone role {name!r}, expected one of "
                         f"{sorted(DEFAULT_SEEDS)}")
    seed = DEFAULT_SEEDS[name] if seed is None else int(seed)
    if name == "IQ":
        return _alexnet_backbone("IQ", seed, "image quality")
    if name == "IA":
        return _alexnet_backbone("IA", seed, "image aesthetics")
    return _resnet50_backbone("FA", seed, "facial attributes")


def default_backbones() -> dict:
    """The IQ / IA / FA trio with their fixed default seeds."""
    return {name: make_backbone(name) for name in ("IQ", "IA", "FA")}
