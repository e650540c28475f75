"""Synthetic datasets with known ground truth.

Two generators: a linearly separable classification set with a guaranteed
margin, and a (optionally noisy) linear regression set. Both report the
planted weight vector and which features are informative, so tests can
check recovered masks and models against the truth. A writer turns either
into a manifest + FVEC files plus a truth sidecar JSON.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .store import (
    CANONICAL_DIMS,
    DatasetManifest,
    FeatureBlock,
    SampleRecord,
    save_manifest,
    write_block,
)


@dataclass(frozen=True)
class SynthTruth:
    """The planted model behind a synthetic dataset."""

    weights: np.ndarray
    bias: float
    informative: tuple  # sorted feature indices carrying signal
    task: str
    margin: float = 0.0
    noise: float = 0.0

    def to_dict(self) -> dict:
        return {
            "weights": [float(w) for w in self.weights],
            "bias": float(self.bias),
            "informative": [int(i) for i in self.informative],
            "task": self.task,
            "margin": self.margin,
            "noise": self.noise,
        }


def _planted_weights(dim: int, informative: int, rng: np.random.Generator):
    if not 1 <= informative <= dim:
        raise ValueError(f"informative count must lie in [1, {dim}], got {informative}")
    idx = np.sort(rng.choice(dim, size=informative, replace=False))
    w = np.zeros(dim)
    # keep planted coefficients away from zero so every chosen feature matters
    w[idx] = rng.uniform(0.5, 1.5, size=informative) * rng.choice([-1.0, 1.0], size=informative)
    return w, idx


def make_separable_classification(n_samples: int, dim: int, seed: int,
                                  informative: int | None = None, margin: float = 1.0):
    """Gaussian features with labels from a planted linear rule.

    Samples violating the requested margin are shifted along the planted
    weight vector until they sit exactly on it, so the returned set is
    separable with functional margin >= ``margin`` by construction. Only
    informative coordinates move; noise features stay pure noise. Returns
    ``(X, y, truth)`` with y in {-1, +1}.
    """
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    if margin <= 0:
        raise ValueError("margin must be positive")
    rng = np.random.default_rng(seed)
    if informative is None:
        informative = dim
    w, idx = _planted_weights(dim, informative, rng)
    X = rng.standard_normal((n_samples, dim))
    raw = X @ w
    b = -float(np.median(raw))  # keeps the two classes near balance
    raw = raw + b
    y = np.where(raw >= 0.0, 1.0, -1.0)
    gaps = margin - y * raw
    push = np.maximum(gaps, 0.0) / float(w @ w)
    X = X + (push * y)[:, None] * w[None, :]
    truth = SynthTruth(weights=w, bias=b, informative=tuple(int(i) for i in idx),
                       task="classification", margin=margin)
    return X, y, truth


def make_linear_regression(n_samples: int, dim: int, seed: int,
                           informative: int | None = None, noise: float = 0.0):
    """Gaussian features and targets y = X w + b (+ Gaussian noise)."""
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    if noise < 0:
        raise ValueError("noise must be non-negative")
    rng = np.random.default_rng(seed)
    if informative is None:
        informative = dim
    w, idx = _planted_weights(dim, informative, rng)
    X = rng.standard_normal((n_samples, dim))
    b = float(rng.uniform(-1.0, 1.0))
    y = X @ w + b
    if noise > 0:
        y = y + rng.standard_normal(n_samples) * noise
    truth = SynthTruth(weights=w, bias=b, informative=tuple(int(i) for i in idx),
                       task="regression", noise=noise)
    return X, y, truth


def _block_name_ok(name: str, dim: int) -> None:
    canonical = CANONICAL_DIMS.get(name)
    if canonical is not None and dim != canonical:
        raise ValueError(
            f"block name {name!r} is reserved for dim {canonical}; "
            f"use a non-reserved name for dim {dim}"
        )


def write_synth_dataset(out_dir, task: str, n_samples: int, block_dims: dict,
                        seed: int, informative: int | None = None,
                        noise: float = 0.0, margin: float = 1.0,
                        dataset_name: str = "synthetic"):
    """Generate one dataset and write manifest + one FVEC file per block.

    ``block_dims`` maps block name to dimensionality; the planted rule lives
    on the concatenation in that order (reserved names must come with their
    fixed dims). Returns the manifest path. A ``truth.json`` sidecar records
    the planted model.
    """
    if task not in ("classification", "regression"):
        raise ValueError(f"unknown task {task!r}")
    if not block_dims:
        raise ValueError("need at least one block")
    for name, dim in block_dims.items():
        _block_name_ok(name, int(dim))
    total = int(sum(block_dims.values()))
    if task == "classification":
        X, y, truth = make_separable_classification(
            n_samples, total, seed, informative=informative, margin=margin)
    else:
        X, y, truth = make_linear_regression(
            n_samples, total, seed, informative=informative, noise=noise)

    os.makedirs(out_dir, exist_ok=True)
    width = len(str(n_samples - 1))
    if task == "classification":
        # raw decision values double as scores; labels are stored natively
        raw = X @ truth.weights + truth.bias
        samples = [
            SampleRecord(id=f"s{i:0{width}d}", score=float(raw[i]), label=int(y[i]))
            for i in range(n_samples)
        ]
        lo, hi = float(np.min(raw)) - 1.0, float(np.max(raw)) + 1.0
    else:
        samples = [
            SampleRecord(id=f"s{i:0{width}d}", score=float(y[i]))
            for i in range(n_samples)
        ]
        lo, hi = float(np.min(y)) - 1.0, float(np.max(y)) + 1.0

    refs = {}
    col = 0
    for name, dim in block_dims.items():
        dim = int(dim)
        fname = f"{name}.fvec"
        block = FeatureBlock(name=name, rows=X[:, col : col + dim].astype(np.float32))
        write_block(block, os.path.join(out_dir, fname))
        refs[name] = fname
        col += dim

    manifest = DatasetManifest(
        dataset_name=dataset_name,
        samples=tuple(samples),
        block_refs=refs,
        score_range=(lo, hi),
        metadata={"generator": {"task": task, "seed": seed, "n_samples": n_samples,
                                "block_dims": {k: int(v) for k, v in block_dims.items()},
                                "informative": informative, "noise": noise,
                                "margin": margin}},
    )
    manifest_path = os.path.join(out_dir, "manifest.json")
    save_manifest(manifest, manifest_path)
    with open(os.path.join(out_dir, "truth.json"), "w", encoding="utf-8") as fh:
        json.dump(truth.to_dict(), fh, indent=2)
        fh.write("\n")
    return manifest_path
