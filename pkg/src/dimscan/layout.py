"""Dimension-major block layout and conversions from row-major collections.

A collection of vectors is stored row-major (one vector after another).
For search we re-arrange groups of up to ``block_size`` vectors into
blocks where each dimension's values sit contiguously, so a distance
kernel can sweep one dimension across many vectors in a tight loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_BLOCK_SIZE = 64


@dataclass(frozen=True)
class VectorCollection:
    """Row-major float32 matrix of n vectors with external ids."""

    data: np.ndarray  # shape (n, d), float32, C-contiguous
    ids: np.ndarray  # shape (n,), int64

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float32)
        if data.ndim != 2:
            raise ValueError("collection data must be 2-dimensional")
        if data.shape[1] < 1:
            raise ValueError("dimensionality must be >= 1")
        object.__setattr__(self, "data", data)
        ids = np.asarray(self.ids, dtype=np.int64)
        if ids.shape != (data.shape[0],):
            raise ValueError("ids length must equal vector count")
        object.__setattr__(self, "ids", ids)

    @classmethod
    def from_array(cls, data, ids=None) -> "VectorCollection":
        data = np.ascontiguousarray(data, dtype=np.float32)
        if ids is None:
            ids = np.arange(data.shape[0], dtype=np.int64)
        return cls(data=data, ids=ids)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class Block:
    """Up to ``block_size`` vectors stored dimension-major.

    ``data[j, i]`` holds dimension ``j`` of the vector whose external id is
    ``ids[i]``.  The vector axis is padded with zeros up to ``m_padded`` so
    kernel loops run a fixed trip count; padded slots never surface in
    results.
    """

    data: np.ndarray  # shape (d, m_padded), float32, C-contiguous
    ids: np.ndarray  # shape (m,), int64
    m: int

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float32)
        object.__setattr__(self, "data", data)
        ids = np.asarray(self.ids, dtype=np.int64)
        object.__setattr__(self, "ids", ids)
        if not 1 <= self.m <= data.shape[1]:
            raise ValueError("vector count out of range for padded width")
        if ids.shape != (self.m,):
            raise ValueError("ids length must equal vector count")

    @property
    def d(self) -> int:
        return self.data.shape[0]

    @property
    def m_padded(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class BlockMetadata:
    """Per-dimension arithmetic means over the vectors in scope."""

    means: np.ndarray  # shape (d,), float64


def to_blocks(collection: VectorCollection, block_size: int = DEFAULT_BLOCK_SIZE,
              pad: bool = True) -> list[Block]:
    """Partition a collection, in order, into dimension-major blocks.

    The last block may hold fewer than ``block_size`` vectors; with ``pad``
    its storage is still ``block_size`` wide, zero-filled past ``m``.
    """
    if block_size < 1:
        raise ValueError("block_size must be >= 1")
    blocks = []
    for start in range(0, collection.n, block_size):
        rows = collection.data[start:start + block_size]
        m = rows.shape[0]
        width = block_size if pad else m
        data = np.zeros((collection.d, width), dtype=np.float32)
        data[:, :m] = rows.T
        blocks.append(Block(data=data, ids=collection.ids[start:start + m], m=m))
    return blocks


def from_blocks(blocks: list[Block]) -> VectorCollection:
    """Inverse of :func:`to_blocks`; bit-exact round trip."""
    if not blocks:
        return VectorCollection.from_array(np.empty((0, 1), dtype=np.float32))
    d = blocks[0].d
    for b in blocks:
        if b.d != d:
            raise ValueError(f"blocks disagree on dimensionality: {b.d} != {d}")
    data = np.concatenate([b.data[:, :b.m].T for b in blocks], axis=0)
    ids = np.concatenate([b.ids for b in blocks])
    return VectorCollection(data=np.ascontiguousarray(data), ids=ids)


def compute_means(scope) -> BlockMetadata:
    """Per-dimension means of a collection or block, 64-bit accumulation."""
    if isinstance(scope, VectorCollection):
        if scope.n == 0:
            raise ValueError("cannot compute means of an empty collection")
        values = scope.data.astype(np.float64)
        means = values.sum(axis=0) / scope.n
    elif isinstance(scope, Block):
        values = scope.data[:, :scope.m].astype(np.float64)
        means = values.sum(axis=1) / scope.m
    else:
        raise TypeError(f"unsupported scope type: {type(scope).__name__}")
    return BlockMetadata(means=means)
