"""End-to-end extraction: image folder -> FVEC blocks + manifest.

Images are processed in sorted filename order so output files are
deterministic. Every image id (the filename stem) must appear in the
scores file and vice versa. In face-region mode, images where the
detector finds nothing are excluded from all outputs and logged; the
exclusion list is recorded in the manifest metadata.
"""

from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, UnidentifiedImageError

from .backbones import default_backbones
from .boxes import clamp, enlarge, pixel_bounds
from .detect import detect_face
from .fvec_io import write_fvec, write_manifest

log = logging.getLogger("faceaes_extractor")

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp")

REGION_MODES = ("whole-image", "face-region")


class ExtractionError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExtractionJob:
    """One extraction run: where to read, how to crop, where to write."""

    image_dir: str
    scores_path: str
    out_dir: str
    region_mode: str = "whole-image"
    detector: str = "blob"
    detector_model: str | None = None
    dataset_name: str = "extracted"
    enlarge_fraction: float = 0.1
    image_size: int = 224
    batch_size: int = 16

    def __post_init__(self):
        if self.region_mode not in REGION_MODES:
            raise ValueError(f"region_mode must be one of {REGION_MODES}, "
                             f"got {self.region_mode!r}")
        if self.image_size < 32:
            raise ValueError("image_size must be at least 32")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def load_scores(path) -> dict:
    """Read ``id,score[,label]`` CSV into {id: (score, label-or-None)}."""
    out = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "id" not in reader.fieldnames \
                or "score" not in reader.fieldnames:
            raise ExtractionError(f"{path}: need a header with id,score columns")
        for i, row in enumerate(reader):
            sid = row["id"].strip()
            if sid in out:
                raise ExtractionError(f"{path}: duplicate id {sid!r}")
            label = row.get("label")
            label = int(label) if label not in (None, "") else None
            if label is not None and label not in (-1, 1):
                raise ExtractionError(f"{path}: row {i}: label must be -1 or +1")
            try:
                out[sid] = (float(row["score"]), label)
            except ValueError as exc:
                raise ExtractionError(f"{path}: row {i}: bad score ({exc})") from exc
    if not out:
        raise ExtractionError(f"{path}: no score rows")
    return out


def list_images(image_dir) -> list:
    """Sorted (stem, filename) pairs for the supported image files."""
    pairs = []
    seen = {}
    for fname in sorted(os.listdir(image_dir)):
        stem, ext = os.path.splitext(fname)
        if ext.lower() not in IMAGE_EXTENSIONS:
            continue
        if stem in seen:
            raise ExtractionError(
                f"{image_dir}: ids must be unique, {stem!r} appears as "
                f"{seen[stem]!r} and {fname!r}")
        seen[stem] = fname
        pairs.append((stem, fname))
    if not pairs:
        raise ExtractionError(f"{image_dir}: no images found")
    return pairs


def _load_image(path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"))
    except (UnidentifiedImageError, OSError) as exc:
        raise ExtractionError(f"unreadable image {path}: {exc}") from exc


def _prepare(arr: np.ndarray, job: ExtractionJob) -> np.ndarray | None:
    """Crop (face-region mode) and resize one image; None means exclude."""
    if job.region_mode == "face-region":
        box = detect_face(arr, backend=job.detector, model_path=job.detector_model)
        if box is None:
            return None
        h, w = arr.shape[:2]
        box = clamp(enlarge(box, job.enlarge_fraction), w, h)
        left, top, right, bottom = pixel_bounds(box, w, h)
        arr = arr[top:bottom, left:right]
    img = Image.fromarray(arr).resize((job.image_size, job.image_size),
                                      Image.BILINEAR)
    return np.asarray(img, dtype=np.uint8)


def extract_features(job: ExtractionJob, backbones: dict | None = None) -> str:
    """Run one job and return the path of the written manifest.

    ``backbones`` defaults to the IQ/IA/FA trio; pass prebuilt ones to
    amortize model construction across jobs.
    """
    scores = load_scores(job.scores_path)
    images = list_images(job.image_dir)
    image_ids = {stem for stem, _ in images}
    missing_scores = sorted(i for i in image_ids if i not in scores)
    if missing_scores:
        raise ExtractionError(f"images without a score row: {missing_scores[:5]}")
    missing_images = sorted(i for i in scores if i not in image_ids)
    if missing_images:
        raise ExtractionError(f"score rows without an image: {missing_images[:5]}")

    if backbones is None:
        backbones = default_backbones()

    prepared = []
    kept = []
    excluded = []
    for stem, fname in images:
        arr = _load_image(os.path.join(job.image_dir, fname))
        ready = _prepare(arr, job)
        if ready is None:
            log.warning("excluding %s: no face detected", fname)
            excluded.append(stem)
            continue
        prepared.append(ready)
        kept.append(stem)
    if not kept:
        raise ExtractionError("no samples left after face detection")

    batch = np.stack(prepared)
    os.makedirs(job.out_dir, exist_ok=True)
    refs = {}
    for name, backbone in backbones.items():
        parts = [backbone.embed(batch[i : i + job.batch_size])
                 for i in range(0, batch.shape[0], job.batch_size)]
        rows = np.concatenate(parts, axis=0)
        fname = f"{name}.fvec"
        write_fvec(os.path.join(job.out_dir, fname), name, rows)
        refs[name] = fname

    samples = [{"id": sid, "score": scores[sid][0], "label": scores[sid][1]}
               for sid in kept]
    values = [s["score"] for s in samples]
    metadata = {
        "region_mode": job.region_mode,
        "backbones": {name: b.provenance for name, b in backbones.items()},
        "image_size": job.image_size,
        "excluded": excluded,
    }
    if job.region_mode == "face-region":
        metadata["detector"] = job.detector
        metadata["enlarge_fraction"] = job.enlarge_fraction
    manifest_path = os.path.join(job.out_dir, "manifest.json")
    write_manifest(manifest_path, job.dataset_name, samples, refs,
                   (min(values) - 1.0, max(values) + 1.0), metadata)
    return manifest_path
