"""Self-describing binary checkpoint container.

Layout (all integers little-endian):

    magic "MFCK" | u32 format version | u32 header length | header JSON
    | u32 tensor count | tensor records

Each tensor record is: u16 name length, name bytes, u8 dtype tag
(0 = float32, 1 = float64), u8 rank, rank u32 dims, raw payload.
The header JSON carries the model configs, quantizer bounds, ordering,
stage name, and library hash; weights ship as float32 by default, while
training-state snapshots use float64 so optimizer resume is bit-exact.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .autodiff import Tensor

MAGIC = b"MFCK"
FORMAT_VERSION = 1
_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_TAGS = {"f32": 0, "f64": 1}


class CheckpointError(RuntimeError):
    pass


def save_checkpoint(path: str | Path, tensors: dict[str, np.ndarray | Tensor], header: dict, dtype: str = "f32") -> None:
    tag = _TAGS[dtype]
    np_dtype = _DTYPES[tag]
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(struct.pack("<I", len(tensors)))
        for name in sorted(tensors):
            arr = tensors[name]
            data = arr.data if isinstance(arr, Tensor) else np.asarray(arr)
            payload = np.ascontiguousarray(data, dtype=np_dtype)
            encoded = name.encode()
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<BB", tag, payload.ndim))
            for dim in payload.shape:
                fh.write(struct.pack("<I", dim))
            fh.write(payload.tobytes())


def load_checkpoint(path: str | Path) -> tuple[dict[str, np.ndarray], dict]:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise CheckpointError(f"{path}: bad magic bytes")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != FORMAT_VERSION:
            raise CheckpointError(f"{path}: unsupported format version {version}")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode())
        (count,) = struct.unpack("<I", fh.read(4))
        tensors: dict[str, np.ndarray] = {}
        for _ in range(count):
            (nlen,) = struct.unpack("<H", fh.read(2))
            name = fh.read(nlen).decode()
            tag, rank = struct.unpack("<BB", fh.read(2))
            if tag not in _DTYPES:
                raise CheckpointError(f"{path}: unknown dtype tag {tag}")
            dims = struct.unpack(f"<{rank}I", fh.read(4 * rank)) if rank else ()
            np_dtype = _DTYPES[tag]
            n_items = int(np.prod(dims)) if dims else 1
            raw = fh.read(n_items * np_dtype.itemsize)
            tensors[name] = np.frombuffer(raw, dtype=np_dtype).reshape(dims).astype(np.float64)
    return tensors, header


def tensors_to_params(tensors: dict[str, np.ndarray]) -> dict[str, Tensor]:
    return {name: Tensor(arr, requires_grad=True) for name, arr in tensors.items()}
