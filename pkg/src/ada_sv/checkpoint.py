"""Checkpoint archive: JSON tensor manifest + float64 blob.

Layout: an 8-byte magic string, a uint32 little-endian manifest length,
the UTF-8 JSON manifest, then every tensor's values as little-endian
float64 in manifest order. The manifest lists (name, shape) for each
tensor plus a free-form ``meta`` dict (step counter, config echo, ...).
float32 training states survive the float64 round-trip bit-exactly.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"ADASVCK1"


def save_checkpoint(path: str | Path, tensors: dict[str, np.ndarray], meta: dict | None = None) -> None:
    """Write tensors (in dict order) and metadata to one file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    entries = []
    blobs = []
    for name, value in tensors.items():
        arr = np.asarray(value, dtype=np.float64)
        entries.append({"name": name, "shape": list(arr.shape)})
        blobs.append(arr.astype("<f8", copy=False).tobytes())
    manifest = json.dumps({"tensors": entries, "meta": meta or {}}).encode("utf-8")
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(manifest)))
        fh.write(manifest)
        for blob in blobs:
            fh.write(blob)
    tmp.replace(path)


def load_checkpoint(path: str | Path) -> tuple[dict[str, np.ndarray], dict]:
    """Read a checkpoint back as ({name: float64 array}, meta)."""
    raw = Path(path).read_bytes()
    if len(raw) < len(MAGIC) + 4 or raw[: len(MAGIC)] != MAGIC:
        raise ValueError(f"{path}: not a checkpoint file (bad magic)")
    n = struct.unpack("<I", raw[len(MAGIC) : len(MAGIC) + 4])[0]
    header_end = len(MAGIC) + 4 + n
    if len(raw) < header_end:
        raise ValueError(f"{path}: truncated manifest")
    manifest = json.loads(raw[len(MAGIC) + 4 : header_end].decode("utf-8"))
    tensors: dict[str, np.ndarray] = {}
    offset = header_end
    for entry in manifest["tensors"]:
        count = int(np.prod(entry["shape"], dtype=np.int64)) if entry["shape"] else 1
        end = offset + 8 * count
        if len(raw) < end:
            raise ValueError(f"{path}: truncated blob at tensor {entry['name']!r}")
        tensors[entry["name"]] = np.frombuffer(raw[offset:end], dtype="<f8").reshape(entry["shape"]).copy()
        offset = end
    if offset != len(raw):
        raise ValueError(f"{path}: {len(raw) - offset} trailing bytes after last tensor")
    return tensors, manifest.get("meta", {})


__all__ = ["MAGIC", "save_checkpoint", "load_checkpoint"]
