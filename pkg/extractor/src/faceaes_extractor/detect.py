"""Face detection backends.

Two interchangeable detectors share one contract: given an image array
they return the largest face-like bounding box, or None when nothing is
found (callers treat None as "exclude this sample").

``blob`` is a self-contained luminance detector: it thresholds the image
at the mid-point of its dynamic range and keeps the largest bright
connected component. It is intentionally simple so the pipeline can run
and be tested without any model files. ``yunet`` wraps OpenCV's
FaceDetectorYN and needs an explicit ONNX model path, since the wheel
ships no detection models.
"""

from __future__ import annotations

import os

import numpy as np
from scipy import ndimage

from .boxes import Box, largest


def _as_gray(image) -> np.ndarray:
    arr = np.asarray(image)
    if arr.ndim == 3:
        arr = arr.mean(axis=2)
    if arr.ndim != 2:
        raise ValueError(f"expected a HxW or HxWxC image, got shape {arr.shape}")
    return arr.astype(np.float64)


def _detect_blob(image, min_area: float) -> Box | None:
    gray = _as_gray(image)
    lo, hi = float(gray.min()), float(gray.max())
    if hi <= lo:
        return None  # flat image, nothing to find
    mask = gray > (lo + hi) / 2.0
    labels, count = ndimage.label(mask)
    if count == 0:
        return None
    boxes = []
    for sl in ndimage.find_objects(labels):
        if sl is None:
            continue
        ys, xs = sl
        box = Box(float(xs.start), float(ys.start), float(xs.stop), float(ys.stop))
        if box.area >= min_area:
            boxes.append(box)
    return largest(boxes)


def _detect_yunet(image, model_path) -> Box | None:
    if not model_path:
        raise ValueError("yunet backend needs an ONNX model file (model_path)")
    if not os.path.exists(model_path):
        raise FileNotFoundError(f"detector model not found: {model_path}")
    import cv2

    arr = np.asarray(image)
    if arr.ndim == 2:
        arr = np.stack([arr] * 3, axis=2)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected a HxW or HxWx3 image, got shape {arr.shape}")
    bgr = np.ascontiguousarray(arr[:, :, ::-1].astype(np.uint8))
    h, w = bgr.shape[:2]
    try:
        detector = cv2.FaceDetectorYN_create(str(model_path), "", (w, h))
    except cv2.error as exc:
        raise ValueError(f"{model_path}: not a loadable detector model ({exc})") from exc
    _, faces = detector.detect(bgr)
    if faces is None:
        return None
    boxes = [Box(float(x), float(y), float(x + bw), float(y + bh))
             for (x, y, bw, bh) in faces[:, :4]]
    return largest(boxes)


def detect_face(image, backend: str = "blob", model_path=None,
                min_area: float = 16.0) -> Box | None:
    """Largest detected face box, or None if the image holds no face."""
    if backend == "blob":
        return _detect_blob(image, min_area)
    if backend == "yunet":
        return _detect_yunet(image, model_path)
    raise ValueError(f"unknown detector backend {backend!r}")
