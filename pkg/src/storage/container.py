"""
Versioned, self-describing binary container shared by model and embedding files.

Layout (all integers little-endian):

    offset  size  field
    0       4     magic b"ALPC"
    4       2     uint16 format version (currently 1)
    6       1     endianness tag of the array payload, b"<" (little) or b">" (big)
    7       1     reserved, 0
    8       4     uint32 byte length H of the JSON header
    12      H     UTF-8 JSON header, keys sorted:
                    {"kind": str, "meta": {...}, "arrays": [{"name", "shape", "dtype"}, ...]}
    12+H    ...   array payloads back to back, in manifest order, each row-major (C order)
                  with dtype exactly as listed (e.g. "<f8", "<i8")

Readers reject an unknown magic, an unsupported version, a mismatching kind or a
truncated payload.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Any, Mapping

import numpy as np


MAGIC = b"ALPC"
FORMAT_VERSION = 1
SUPPORTED_VERSIONS = (1,)
_PREFIX = struct.Struct("<4sHcxI")


def write_container(path: str | Path, kind: str, meta: Mapping[str, Any], arrays: Mapping[str, np.ndarray]) -> None:
    manifest = []
    payloads = []
    for name, arr in arrays.items():
        a = np.ascontiguousarray(arr)
        if a.dtype.kind == "f":
            a = a.astype("<f8")
        elif a.dtype.kind in "iu":
            a = a.astype("<i8")
        else:
            raise ValueError(f"Unsupported dtype for array {name!r}: {a.dtype}")
        manifest.append({"name": name, "shape": list(a.shape), "dtype": a.dtype.str})
        payloads.append(a.tobytes(order="C"))

    header = json.dumps({"kind": kind, "meta": dict(meta), "arrays": manifest}, sort_keys=True).encode("utf-8")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(_PREFIX.pack(MAGIC, FORMAT_VERSION, b"<", len(header)))
        fh.write(header)
        for chunk in payloads:
            fh.write(chunk)


def read_container(path: str | Path, kind: str) -> tuple[dict[str, Any], dict[str, np.ndarray]]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"No such file: {path}")
    blob = path.read_bytes()
    if len(blob) < _PREFIX.size:
        raise ValueError(f"{path}: file too short to be a container")

    magic, version, tag, header_len = _PREFIX.unpack_from(blob, 0)
    if magic != MAGIC:
        raise ValueError(f"{path}: not a model container (bad magic {magic!r})")
    if version not in SUPPORTED_VERSIONS:
        raise ValueError(f"{path}: unsupported format version {version}; supported: {SUPPORTED_VERSIONS}")
    if tag not in (b"<", b">"):
        raise ValueError(f"{path}: unknown endianness tag {tag!r}")

    start = _PREFIX.size
    header = json.loads(blob[start:start + header_len].decode("utf-8"))
    if header.get("kind") != kind:
        raise ValueError(f"{path}: expected a {kind!r} file, found {header.get('kind')!r}")

    arrays: dict[str, np.ndarray] = {}
    offset = start + header_len
    for entry in header["arrays"]:
        dtype = np.dtype(entry["dtype"])
        shape = tuple(entry["shape"])
        nbytes = dtype.itemsize * int(np.prod(shape, dtype=np.int64))
        if offset + nbytes > len(blob):
            raise ValueError(f"{path}: truncated payload for array {entry['name']!r}")
        a = np.frombuffer(blob, dtype=dtype, count=int(np.prod(shape, dtype=np.int64)), offset=offset)
        arrays[entry["name"]] = a.reshape(shape).astype(dtype.newbyteorder("="))
        offset += nbytes

    return header["meta"], arrays
