"""Reader for the solver's ``.cdr`` dataset containers.

Implemented against the documented container layout (magic "CDR1",
u32 version, u64-length JSON manifest, then per record X0 and XM as
row-major little-endian floats), independently of the solver package: the
file format is the interface between the two components.
"""

from __future__ import annotations

import json
import struct
import zlib

import numpy as np
import torch
from torch.utils.data import Dataset

MAGIC = b"CDR1"
SUPPORTED_VERSION = 1


class DatasetFormatError(ValueError):
    pass


class CdrReader:
    """Random-access reader with checksum verification."""

    def __init__(self, path):
        self.path = str(path)
        with open(path, "rb") as fh:
            head = fh.read(16)
            if len(head) < 16 or head[:4] != MAGIC:
                raise DatasetFormatError(f"{path}: not a CDR1 container")
            (version,) = struct.unpack("<I", head[4:8])
            if version != SUPPORTED_VERSION:
                raise DatasetFormatError(f"{path}: unsupported version {version}")
            (mlen,) = struct.unpack("<Q", head[8:16])
            blob = fh.read(mlen)
            if len(blob) < mlen:
                raise DatasetFormatError(f"{path}: truncated manifest")
            self.manifest = json.loads(blob.decode())
            self._payload_start = 16 + mlen
        self.records = self.manifest["records"]
        self.coarse_n = self.manifest["grid"]["coarse_n"]
        self._dtype = np.dtype(self.manifest["dtype"]).newbyteorder("<")

    def __len__(self) -> int:
        return len(self.records)

    def read(self, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(X0, XM, c) for record ``k``; fields are float32 (m, m) arrays."""
        rec = self.records[k]
        with open(self.path, "rb") as fh:
            fh.seek(self._payload_start + rec["offset"])
            blob = fh.read(rec["nbytes"])
        if len(blob) < rec["nbytes"]:
            raise DatasetFormatError(f"{self.path}: truncated record {k}")
        if zlib.crc32(blob) != rec["crc32"]:
            raise DatasetFormatError(f"{self.path}: checksum mismatch on record {k}")
        m = self.coarse_n
        flat = np.frombuffer(blob, dtype=self._dtype).astype(np.float32)
        if flat.size != 2 * m * m:
            raise DatasetFormatError(f"{self.path}: record {k} has wrong size")
        x0 = flat[: m * m].reshape(m, m)
        xm = flat[m * m :].reshape(m, m)
        return x0, xm, np.asarray(rec["c"], dtype=np.float32)

    def factorial_shape(self) -> tuple[int, int]:
        fact = self.manifest.get("factorial")
        if fact is None:
            raise DatasetFormatError(f"{self.path}: not a factorial dataset")
        return fact["n_ic"], fact["n_c"]

    def factorial_index(self, k: int) -> tuple[int, int]:
        rec = self.records[k]
        return rec["k1"], rec["k2"]


class FieldPairs(Dataset):
    """Torch dataset of ((1, m, m) X0, (4,) c) -> (1, m, m) XM tensors."""

    def __init__(self, reader: CdrReader, indices=None):
        self.reader = reader
        self.indices = list(range(len(reader))) if indices is None else list(indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __getitem__(self, i: int):
        x0, xm, c = self.reader.read(self.indices[i])
        return (
            torch.from_numpy(x0.copy()).unsqueeze(0),
            torch.from_numpy(c.copy()),
            torch.from_numpy(xm.copy()).unsqueeze(0),
        )


def train_val_split(
    reader: CdrReader, val_fraction: float, seed: int
) -> tuple[FieldPairs, FieldPairs]:
    """Deterministic shuffle-and-hold-out split."""
    n = len(reader)
    order = np.random.default_rng(seed).permutation(n)
    n_val = int(round(val_fraction * n))
    return (
        FieldPairs(reader, order[n_val:].tolist()),
        FieldPairs(reader, order[:n_val].tolist()),
    )
