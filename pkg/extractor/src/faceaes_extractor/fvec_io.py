"""Writers for the interchange files consumed by the evaluation tool.

FVEC layout (all integers little-endian)::

    magic      4 bytes   b"FVEC"
    version    u16       currently 1
    name_len   u16
    name       name_len bytes, UTF-8 block name
    n_samples  u64
    dim        u64
    payload    n_samples * dim IEEE-754 float32, row-major
    crc32      u32       CRC-32 of the payload bytes

The manifest is a JSON document with the dataset name, a [min, max] score
range, one record per sample (id, score, optional -1/+1 label) and a map
from block name to the relative path of its FVEC file.
"""

from __future__ import annotations

import json
import struct
import zlib

import numpy as np

MAGIC = b"FVEC"
VERSION = 1

_HEAD = struct.Struct("<4sHH")
_SHAPE = struct.Struct("<QQ")
_CRC = struct.Struct("<I")


def write_fvec(path, name: str, rows: np.ndarray) -> None:
    """Write a 2-D float32 matrix to ``path`` in FVEC format."""
    rows = np.ascontiguousarray(rows, dtype=np.float32)
    if rows.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {rows.shape}")
    if not np.isfinite(rows).all():
        raise ValueError(f"block {name!r} contains NaN or Inf")
    name_bytes = name.encode("utf-8")
    payload = rows.tobytes()
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(MAGIC, VERSION, len(name_bytes)))
        fh.write(name_bytes)
        fh.write(_SHAPE.pack(rows.shape[0], rows.shape[1]))
        fh.write(payload)
        fh.write(_CRC.pack(zlib.crc32(payload)))


def write_manifest(path, dataset_name: str, samples, block_refs: dict,
                   score_range, metadata: dict | None = None) -> None:
    """Write the dataset manifest JSON.

    ``samples`` is a sequence of dicts holding ``id``, ``score`` and an
    optional ``label``; insertion order is preserved in the output.
    """
    lo, hi = float(score_range[0]), float(score_range[1])
    if not lo < hi:
        raise ValueError(f"score_range must satisfy min < max, got ({lo}, {hi})")
    recs = []
    for s in samples:
        rec = {"id": str(s["id"]), "score": float(s["score"])}
        if s.get("label") is not None:
            label = int(s["label"])
            if label not in (-1, 1):
                raise ValueError(f"sample {rec['id']!r}: label must be -1 or +1")
            rec["label"] = label
        recs.append(rec)
    doc = {
        "dataset_name": dataset_name,
        "score_range": [lo, hi],
        "samples": recs,
        "blocks": {str(k): str(v) for k, v in block_refs.items()},
    }
    if metadata:
        doc["metadata"] = metadata
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
