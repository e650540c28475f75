"""Reader and writer for the FVEC binary feature-matrix format.

Layout (all integers little-endian)::

    magic      4 bytes   b"FVEC"
    version    u16       currently 1
    name_len   u16
    name       name_len bytes, UTF-8 block name
    n_samples  u64
    dim        u64
    payload    n_samples * dim IEEE-754 float32, row-major
    crc32      u32       CRC-32 of the payload bytes

The payload CRC makes silent truncation or bit rot detectable without
re-deriving features.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from .errors import ChecksumError, FvecFormatError, NonFiniteError

MAGIC = b"FVEC"
VERSION = 1

_HEAD = struct.Struct("<4sHH")
_SHAPE = struct.Struct("<QQ")
_CRC = struct.Struct("<I")


def write_fvec(path, name: str, rows: np.ndarray) -> None:
    """Write a 2-D float32 matrix to ``path`` in FVEC format.

    ``rows`` is converted to float32; non-finite values are rejected.
    """
    rows = np.ascontiguousarray(rows, dtype=np.float32)
    if rows.ndim != 2:
        raise FvecFormatError(f"expected a 2-D matrix, got shape {rows.shape}")
    if not np.isfinite(rows).all():
        raise NonFiniteError(f"block {name!r} contains NaN or Inf")
    name_bytes = name.encode("utf-8")
    payload = rows.tobytes()
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(MAGIC, VERSION, len(name_bytes)))
        fh.write(name_bytes)
        fh.write(_SHAPE.pack(rows.shape[0], rows.shape[1]))
        fh.write(payload)
        fh.write(_CRC.pack(zlib.crc32(payload)))


def read_fvec(path) -> tuple[str, np.ndarray]:
    """Read an FVEC file, returning ``(name, rows)`` with float32 rows.

    Raises :class:`FvecFormatError` on structural problems,
    :class:`ChecksumError` on CRC mismatch and :class:`NonFiniteError`
    if the stored values are not all finite.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEAD.size:
        raise FvecFormatError(f"{path}: file shorter than the fixed header")
    magic, version, name_len = _HEAD.unpack_from(blob, 0)
    if magic != MAGIC:
        raise FvecFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FvecFormatError(f"{path}: unsupported format version {version}")
    off = _HEAD.size
    if len(blob) < off + name_len + _SHAPE.size:
        raise FvecFormatError(f"{path}: truncated header")
    try:
        name = blob[off : off + name_len].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FvecFormatError(f"{path}: block name is not valid UTF-8") from exc
    off += name_len
    n, dim = _SHAPE.unpack_from(blob, off)
    off += _SHAPE.size
    payload_len = n * dim * 4
    expected_len = off + payload_len + _CRC.size
    if len(blob) != expected_len:
        raise FvecFormatError(
            f"{path}: expected {expected_len} bytes for {n}x{dim} block, got {len(blob)}"
        )
    payload = blob[off : off + payload_len]
    (crc_stored,) = _CRC.unpack_from(blob, off + payload_len)
    crc_actual = zlib.crc32(payload)
    if crc_stored != crc_actual:
        raise ChecksumError(
            f"{path}: payload CRC-32 {crc_actual:#010x} != stored {crc_stored:#010x}"
        )
    rows = np.frombuffer(payload, dtype="<f4").reshape(n, dim)
    if not np.isfinite(rows).all():
        raise NonFiniteError(f"{path}: block {name!r} contains NaN or Inf")
    return name, rows.copy()


def stored_crc(path) -> int:
    """The payload CRC-32 recorded in an FVEC file (after verifying it)."""
    read_fvec(path)
    with open(path, "rb") as fh:
        fh.seek(-_CRC.size, 2)
        (crc,) = _CRC.unpack(fh.read(_CRC.size))
    return crc
