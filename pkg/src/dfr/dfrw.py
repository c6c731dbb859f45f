"""Reader for the DFRW portable weight container.

Layout, all integers little-endian u32:

    magic "DFRW" | version=1 | manifest_len | manifest (UTF-8 JSON)
    then per tensor: name_len | name | ndim | dims[ndim] | float32 data

The manifest carries the layer order, the preprocessing mean/std, and a
checksum of the source weights. The file must end exactly after the last
tensor record.
"""

import json
import struct
from typing import Any

import numpy as np

from .errors import LoadError

MAGIC = b"DFRW"
VERSION = 1


def _take(buf: bytes, offset: int, count: int, what: str) -> tuple[bytes, int]:
    if offset + count > len(buf):
        raise LoadError(
            f"truncated file: needed {count} bytes for {what} at offset {offset}, "
            f"file has {len(buf)}"
        )
    return buf[offset : offset + count], offset + count


def _u32(buf: bytes, offset: int, what: str) -> tuple[int, int]:
    raw, offset = _take(buf, offset, 4, what)
    return struct.unpack("<I", raw)[0], offset


def read_dfrw(path) -> tuple[dict[str, Any], list[tuple[str, np.ndarray]]]:
    """Parse a DFRW file into (manifest, ordered list of (name, tensor))."""
    with open(path, "rb") as fh:
        buf = fh.read()
    magic, offset = _take(buf, 0, 4, "magic")
    if magic != MAGIC:
        raise LoadError(f"bad magic {magic!r}, expected {MAGIC!r}")
    version, offset = _u32(buf, offset, "version")
    if version != VERSION:
        raise LoadError(f"unsupported version {version}, expected {VERSION}")
    manifest_len, offset = _u32(buf, offset, "manifest length")
    raw_manifest, offset = _take(buf, offset, manifest_len, "manifest")
    try:
        manifest = json.loads(raw_manifest.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise LoadError(f"manifest is not valid UTF-8 JSON: {exc}") from exc

    tensors: list[tuple[str, np.ndarray]] = []
    while offset < len(buf):
        name_len, offset = _u32(buf, offset, "tensor name length")
        raw_name, offset = _take(buf, offset, name_len, "tensor name")
        try:
            name = raw_name.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise LoadError(f"tensor name at offset {offset} is not UTF-8") from exc
        ndim, offset = _u32(buf, offset, f"ndim of {name!r}")
        if ndim < 1 or ndim > 4:
            raise LoadError(f"tensor {name!r} has unsupported ndim {ndim}")
        dims = []
        for i in range(ndim):
            d, offset = _u32(buf, offset, f"dim {i} of {name!r}")
            if d < 1:
                raise LoadError(f"tensor {name!r} has empty dim {i}")
            dims.append(d)
        count = int(np.prod(dims))
        raw, offset = _take(buf, offset, count * 4, f"data of {name!r}")
        data = np.frombuffer(raw, dtype="<f4").reshape(dims).astype(np.float32)
        tensors.append((name, data))
    return manifest, tensors
