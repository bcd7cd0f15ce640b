"""Dataset and store file IO.

Supports the classic ``.fvecs``/``.ivecs`` record formats (a 4-byte
little-endian dimensionality header per record, followed by that many
little-endian payload values) and a self-defined ``.pdx`` container for
persisted dimension-major stores: magic ``PDXv1``, a fixed-width
little-endian header, the global means, an optional rotation matrix, the
blocks, and an optional bucket-index section.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .layout import Block, VectorCollection

MAGIC = b"PDXv1\x00\x00\x00"
VERSION = 1
FLAG_TRANSFORM = 1
FLAG_IVF = 2

_HEADER = struct.Struct("<8sIIQIIII")  # magic, version, flags, n, d, block_size, block_count, reserved


class FormatError(ValueError):
    """A file does not follow the expected byte layout."""


def read_fvecs(path) -> VectorCollection:
    data = _read_vecs(path, np.float32)
    return VectorCollection.from_array(data)


def write_fvecs(collection: VectorCollection, path):
    _write_vecs(path, collection.data.astype(np.float32, copy=False))


def read_ivecs(path) -> np.ndarray:
    """Integer records, e.g. ground-truth neighbor ids."""
    return _read_vecs(path, np.int32)


def write_ivecs(matrix: np.ndarray, path):
    _write_vecs(path, np.ascontiguousarray(matrix, dtype=np.int32))


def _read_vecs(path, dtype) -> np.ndarray:
    raw = np.fromfile(path, dtype=np.uint8)
    if raw.size == 0:
        raise FormatError(f"{path}: no records (dimensionality is indeterminate)")
    if raw.size < 4:
        raise FormatError(f"{path}: truncated record at byte offset 0")
    d = int(np.frombuffer(raw[:4].tobytes(), dtype="<u4")[0])
    if d < 1:
        raise FormatError(f"{path}: invalid dimensionality {d} at byte offset 0")
    record = 4 + 4 * d
    if raw.size % record != 0:
        offset = (raw.size // record) * record
        raise FormatError(f"{path}: truncated record at byte offset {offset}")
    records = raw.reshape(-1, record)
    headers = records[:, :4].copy().view("<u4")[:, 0]
    bad = np.flatnonzero(headers != d)
    if bad.size:
        raise FormatError(f"{path}: inconsistent dimensionality {int(headers[bad[0]])} "
                          f"at record {int(bad[0])}, expected {d}")
    return records[:, 4:].copy().view(np.dtype(dtype).newbyteorder("<")).astype(dtype)


def _write_vecs(path, matrix: np.ndarray):
    n, d = matrix.shape
    out = np.empty((n, 4 + 4 * d), dtype=np.uint8)
    out[:, :4] = np.frombuffer(struct.pack("<I", d), dtype=np.uint8)
    out[:, 4:] = matrix.view(np.uint8).reshape(n, 4 * d)
    try:
        out.tofile(path)
    except OSError as exc:
        raise OSError(f"{path}: {exc}") from exc


@dataclass
class BlockStore:
    """A persisted collection in dimension-major blocks plus metadata."""

    blocks: list[Block]
    global_means: np.ndarray  # (d,) float64
    block_size: int
    transform_seed: int | None = None
    transform_matrix: np.ndarray | None = None  # (d, d) float32
    ivf: "IvfSection | None" = None

    @property
    def n(self) -> int:
        return sum(b.m for b in self.blocks)

    @property
    def d(self) -> int:
        return self.blocks[0].d if self.blocks else self.global_means.shape[0]


@dataclass
class IvfSection:
    """Bucket-index extension: centroids and which blocks each bucket owns."""

    nlist: int
    training_seed: int
    centroids: np.ndarray  # (nlist, d) float32
    bucket_offsets: np.ndarray  # (nlist + 1,) uint32 into the block list
    bucket_means: np.ndarray  # (nlist, d) float64


def write_pdx(store: BlockStore, path):
    flags = 0
    if store.transform_matrix is not None:
        flags |= FLAG_TRANSFORM
    if store.ivf is not None:
        flags |= FLAG_IVF
    d = store.d
    try:
        with open(path, "wb") as f:
            f.write(_HEADER.pack(MAGIC, VERSION, flags, store.n, d,
                                 store.block_size, len(store.blocks), 0))
            f.write(np.asarray(store.global_means, dtype="<f8").tobytes())
            if store.transform_matrix is not None:
                f.write(struct.pack("<Q", store.transform_seed))
                f.write(store.transform_matrix.astype("<f4", copy=False).tobytes())
            for b in store.blocks:
                f.write(struct.pack("<II", b.m, b.m_padded))
                f.write(b.ids.astype("<i8", copy=False).tobytes())
                f.write(b.data.astype("<f4", copy=False).tobytes())
            if store.ivf is not None:
                ivf = store.ivf
                f.write(struct.pack("<IQ", ivf.nlist, ivf.training_seed))
                f.write(ivf.centroids.astype("<f4", copy=False).tobytes())
                f.write(ivf.bucket_offsets.astype("<u4", copy=False).tobytes())
                f.write(ivf.bucket_means.astype("<f8", copy=False).tobytes())
    except OSError as exc:
        raise OSError(f"{path}: {exc}") from exc


class _Reader:
    def __init__(self, path):
        self.path = path
        with open(path, "rb") as f:
            self.buf = f.read()
        self.pos = 0

    def take(self, nbytes: int) -> bytes:
        if self.pos + nbytes > len(self.buf):
            raise FormatError(f"{self.path}: truncated at byte offset {self.pos}")
        out = self.buf[self.pos:self.pos + nbytes]
        self.pos += nbytes
        return out

    def array(self, dtype, count) -> np.ndarray:
        dtype = np.dtype(dtype)
        return np.frombuffer(self.take(dtype.itemsize * count), dtype=dtype).copy()


def read_pdx(path) -> BlockStore:
    r = _Reader(path)
    magic, version, flags, n, d, block_size, block_count, _ = _HEADER.unpack(r.take(_HEADER.size))
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    global_means = r.array("<f8", d)
    transform_seed = transform_matrix = None
    if flags & FLAG_TRANSFORM:
        (transform_seed,) = struct.unpack("<Q", r.take(8))
        transform_matrix = r.array("<f4", d * d).astype(np.float32).reshape(d, d)
    blocks = []
    for _ in range(block_count):
        m, m_padded = struct.unpack("<II", r.take(8))
        ids = r.array("<i8", m).astype(np.int64)
        data = r.array("<f4", d * m_padded).astype(np.float32).reshape(d, m_padded)
        blocks.append(Block(data=data, ids=ids, m=m))
    ivf = None
    if flags & FLAG_IVF:
        nlist, training_seed = struct.unpack("<IQ", r.take(12))
        centroids = r.array("<f4", nlist * d).astype(np.float32).reshape(nlist, d)
        bucket_offsets = r.array("<u4", nlist + 1)
        bucket_means = r.array("<f8", nlist * d).reshape(nlist, d)
        ivf = IvfSection(nlist=nlist, training_seed=training_seed, centroids=centroids,
                         bucket_offsets=bucket_offsets, bucket_means=bucket_means)
    store = BlockStore(blocks=blocks, global_means=global_means, block_size=block_size,
                       transform_seed=transform_seed, transform_matrix=transform_matrix,
                       ivf=ivf)
    if store.n != n:
        raise FormatError(f"{path}: header claims {n} vectors, blocks hold {store.n}")
    return store
