"""Binary matrix container and JSON sidecars.

Every matrix-valued artifact in the repository uses the same container:
a 16-byte magic field holding ``SSOPMAT1`` (zero padded), a little-endian
u32 row count, u32 column count, one u8 scalar-kind byte (0 = complex128,
little endian, interleaved re/im), then the row-major payload. Optional
metadata travels in a JSON sidecar next to the matrix file.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ssop.util import SchemaError

MAGIC = b"SSOPMAT1" + b"\x00" * 8
SCALAR_COMPLEX128 = 0
_HEADER = struct.Struct("<II B")


def write_matrix(path, matrix, meta=None):
    """Write a 2-D complex matrix; write ``meta`` to a ``.json`` sidecar."""
    path = Path(path)
    m = np.ascontiguousarray(np.atleast_2d(np.asarray(matrix)), dtype="<c16")
    if m.ndim != 2:
        raise SchemaError(f"container holds 2-D matrices, got shape {m.shape}")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(m.shape[0], m.shape[1], SCALAR_COMPLEX128))
        fh.write(m.tobytes(order="C"))
    if meta is not None:
        sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True))
    return path


def read_matrix(path, with_meta=False):
    """Read a matrix written by :func:`write_matrix`."""
    path = Path(path)
    raw = path.read_bytes()
    if raw[:16] != MAGIC:
        raise SchemaError(f"{path}: bad magic, not an SSOPMAT1 container")
    rows, cols, kind = _HEADER.unpack_from(raw, 16)
    if kind != SCALAR_COMPLEX128:
        raise SchemaError(f"{path}: unsupported scalar kind {kind}")
    payload = raw[16 + _HEADER.size :]
    expected = rows * cols * 16
    if len(payload) != expected:
        raise SchemaError(f"{path}: payload is {len(payload)} bytes, expected {expected}")
    m = np.frombuffer(payload, dtype="<c16").reshape(rows, cols).copy()
    if not with_meta:
        return m
    side = sidecar_path(path)
    meta = json.loads(side.read_text()) if side.exists() else None
    return m, meta


def sidecar_path(path):
    return Path(str(path) + ".json")


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True))


def read_json(path):
    return json.loads(Path(path).read_text())
