"""Feature blocks, dataset manifests and per-feature standardization.

A dataset is a JSON manifest (sample ids, ground-truth scores, optional
binary labels) plus one FVEC file per feature block. Block names ``IQ``,
``IA`` and ``FA`` are reserved for the three backbone feature families and
carry fixed dimensionalities; anything else is free-form (synthetic data,
experiments).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import fvec
from .errors import (
    DimMismatchError,
    FvecFormatError,
    ManifestError,
    NonFiniteError,
    RowCountError,
)

#: Reserved block names and their required feature dimensionalities.
CANONICAL_DIMS = {"IQ": 4096, "IA": 4096, "FA": 2048}

#: Row order used whenever canonical blocks are concatenated.
CANONICAL_ORDER = ("IQ", "IA", "FA")

STD_FLOOR = 1e-8


@dataclass(frozen=True)
class FeatureBlock:
    """A named dense matrix of per-sample float32 feature vectors."""

    name: str
    rows: np.ndarray

    def __post_init__(self):
        rows = np.ascontiguousarray(self.rows, dtype=np.float32)
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 1:
            raise DimMismatchError(
                f"block {self.name!r}: expected a non-empty 2-D matrix, got shape {rows.shape}"
            )
        if not np.isfinite(rows).all():
            raise NonFiniteError(f"block {self.name!r} contains NaN or Inf")
        canonical = CANONICAL_DIMS.get(self.name)
        if canonical is not None and rows.shape[1] != canonical:
            raise DimMismatchError(
                f"block {self.name!r} must have dim {canonical}, got {rows.shape[1]}"
            )
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def n_samples(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class SampleRecord:
    id: str
    score: float
    label: int | None = None

    def __post_init__(self):
        if not math.isfinite(self.score):
            raise ManifestError(f"sample {self.id!r}: score must be finite")
        if self.label is not None and self.label not in (-1, 1):
            raise ManifestError(f"sample {self.id!r}: label must be -1 or +1")


@dataclass(frozen=True)
class DatasetManifest:
    """Sample identities, scores/labels and feature-file references."""

    dataset_name: str
    samples: tuple[SampleRecord, ...]
    block_refs: dict[str, str]
    score_range: tuple[float, float]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        ids = [s.id for s in self.samples]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ManifestError(f"duplicate sample ids: {dupes[:5]}")
        lo, hi = self.score_range
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ManifestError(f"invalid score_range {self.score_range}")

    @property
    def n_samples(self) -> int:
        return len(self.samples)

    def ids(self) -> list[str]:
        return [s.id for s in self.samples]

    def scores(self) -> np.ndarray:
        return np.array([s.score for s in self.samples], dtype=np.float64)

    def labels(self) -> np.ndarray | None:
        """Native binary labels, or None if any sample lacks one."""
        if any(s.label is None for s in self.samples):
            return None
        return np.array([s.label for s in self.samples], dtype=np.int64)


def save_manifest(manifest: DatasetManifest, path) -> None:
    doc = {
        "dataset_name": manifest.dataset_name,
        "score_range": list(manifest.score_range),
        "samples": [
            {"id": s.id, "score": s.score}
            if s.label is None
            else {"id": s.id, "score": s.score, "label": s.label}
            for s in manifest.samples
        ],
        "blocks": dict(manifest.block_refs),
    }
    if manifest.metadata:
        doc["metadata"] = manifest.metadata
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_manifest(path) -> DatasetManifest:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: not valid JSON ({exc})") from exc
    for key in ("dataset_name", "score_range", "samples", "blocks"):
        if key not in doc:
            raise ManifestError(f"{path}: missing required field {key!r}")
    samples = []
    for i, rec in enumerate(doc["samples"]):
        try:
            samples.append(
                SampleRecord(
                    id=str(rec["id"]),
                    score=float(rec["score"]),
                    label=int(rec["label"]) if "label" in rec and rec["label"] is not None else None,
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ManifestError(f"{path}: bad sample record at index {i}: {exc}") from exc
    rng = doc["score_range"]
    if not (isinstance(rng, (list, tuple)) and len(rng) == 2):
        raise ManifestError(f"{path}: score_range must be [min, max]")
    return DatasetManifest(
        dataset_name=str(doc["dataset_name"]),
        samples=tuple(samples),
        block_refs={str(k): str(v) for k, v in doc["blocks"].items()},
        score_range=(float(rng[0]), float(rng[1])),
        metadata=doc.get("metadata", {}),
    )


def _load_csv_block(path, name: str) -> FeatureBlock:
    # CSV fallback: header row of feature names, one data row per sample.
    rows = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.float32, ndmin=2)
    if rows.size == 0:
        raise FvecFormatError(f"{path}: CSV block has no data rows")
    return FeatureBlock(name=name, rows=rows)


def load_block(path, expected_name: str, expected_rows: int | None = None) -> FeatureBlock:
    """Load a feature block from an FVEC file (or CSV fallback).

    The stored block name must equal ``expected_name``; for CSV files the
    name is taken from ``expected_name`` directly. ``expected_rows``, when
    given, is checked against the file's row count.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"feature file not found: {path}")
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic == fvec.MAGIC:
        name, rows = fvec.read_fvec(path)
        if name != expected_name:
            raise FvecFormatError(
                f"{path}: block name {name!r} does not match expected {expected_name!r}"
            )
        block = FeatureBlock(name=name, rows=rows)
    else:
        block = _load_csv_block(path, expected_name)
    if expected_rows is not None and block.n_samples != expected_rows:
        raise RowCountError(
            f"{path}: block has {block.n_samples} rows, manifest lists {expected_rows} samples"
        )
    return block


def write_block(block: FeatureBlock, path) -> None:
    fvec.write_fvec(path, block.name, block.rows)


def load_blocks(manifest: DatasetManifest, base_dir, names=None) -> dict[str, FeatureBlock]:
    """Load the manifest's referenced blocks (all, or the named subset)."""
    wanted = list(manifest.block_refs) if names is None else list(names)
    out = {}
    for name in wanted:
        if name not in manifest.block_refs:
            raise ManifestError(f"manifest has no block named {name!r}")
        path = os.path.join(base_dir, manifest.block_refs[name])
        out[name] = load_block(path, name, expected_rows=manifest.n_samples)
    return out


def canonical_block_order(names) -> list[str]:
    """Sort block names so IQ, IA, FA come first in canonical order."""
    names = list(names)
    key = {n: i for i, n in enumerate(CANONICAL_ORDER)}
    return sorted(names, key=lambda n: (key.get(n, len(key)), n))


def concat_blocks(blocks) -> FeatureBlock:
    """Concatenate feature blocks column-wise, preserving row order.

    Canonically named blocks must already appear in IQ, IA, FA order.
    A single-block list is returned unchanged.
    """
    blocks = list(blocks)
    if not blocks:
        raise ValueError("cannot concatenate an empty block list")
    n = blocks[0].n_samples
    for b in blocks[1:]:
        if b.n_samples != n:
            raise RowCountError(
                f"row-count mismatch: {blocks[0].name!r} has {n} rows, {b.name!r} has {b.n_samples}"
            )
    canon_positions = [i for i, b in enumerate(blocks) if b.name in CANONICAL_DIMS]
    canon_names = [blocks[i].name for i in canon_positions]
    if canon_names != canonical_block_order(canon_names):
        raise ValueError(
            f"canonical blocks must be ordered {CANONICAL_ORDER}, got {tuple(canon_names)}"
        )
    if len(blocks) == 1:
        return blocks[0]
    return FeatureBlock(
        name="+".join(b.name for b in blocks),
        rows=np.hstack([b.rows for b in blocks]),
    )


@dataclass(frozen=True)
class Standardizer:
    """Per-feature affine transform fitted on training rows only."""

    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        means = np.asarray(self.means, dtype=np.float64)
        stds = np.asarray(self.stds, dtype=np.float64)
        if means.shape != stds.shape or means.ndim != 1:
            raise DimMismatchError("means and stds must be 1-D vectors of equal length")
        if (stds < STD_FLOOR).any():
            raise ValueError(f"stds must be floored at {STD_FLOOR}")
        means.setflags(write=False)
        stds.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)

    def apply(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.float64)
        if rows.shape[-1] != self.means.shape[0]:
            raise DimMismatchError(
                f"rows have dim {rows.shape[-1]}, standardizer expects {self.means.shape[0]}"
            )
        return (rows - self.means) / self.stds


def fit_standardizer(block: FeatureBlock | np.ndarray, row_indices) -> Standardizer:
    """Fit per-feature mean/std (population) over the selected rows."""
    rows = block.rows if isinstance(block, FeatureBlock) else np.asarray(block)
    row_indices = np.asarray(row_indices, dtype=np.intp)
    if row_indices.size == 0:
        raise ValueError("row_indices must be non-empty")
    sub = rows[row_indices].astype(np.float64)
    means = sub.mean(axis=0)
    stds = sub.std(axis=0)  # population std: fixed for determinism
    stds = np.maximum(stds, STD_FLOOR)
    return Standardizer(means=means, stds=stds)


def median_split(manifest: DatasetManifest) -> np.ndarray:
    """Label the n//2 lowest-scored samples -1 and the rest +1.

    Ties at the median are broken by ascending sample id, which makes the
    split deterministic and invariant to manifest ordering. Returns labels
    aligned with the manifest's sample order.
    """
    if manifest.n_samples < 2:
        raise ManifestError("median_split needs at least 2 samples")
    order = sorted(range(manifest.n_samples), key=lambda i: (manifest.samples[i].score, manifest.samples[i].id))
    labels = np.ones(manifest.n_samples, dtype=np.int64)
    for rank, i in enumerate(order):
        if rank < manifest.n_samples // 2:
            labels[i] = -1
    return labels


def classification_labels(manifest: DatasetManifest) -> np.ndarray:
    """Native labels when the dataset ships them, else a median split."""
    native = manifest.labels()
    if native is not None:
        return native
    return median_split(manifest)
