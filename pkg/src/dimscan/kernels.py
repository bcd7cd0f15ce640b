"""Distance kernels.

The vertical kernels sweep one dimension at a time across every vector
slot of a block, accumulating one partial distance per slot.  Keeping the
per-dimension updates strictly sequential makes accumulation over
``[0, c)`` followed by ``[c, d)`` bit-identical to a single pass over
``[0, d)``, which the adaptive search relies on.

The horizontal kernel is the scalar reference oracle: one vector at a
time, 64-bit accumulation.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .layout import Block


class Metric(str, Enum):
    L2 = "l2"  # squared euclidean, minimized
    L1 = "l1"  # manhattan, minimized
    IP = "ip"  # inner product, maximized (search negates internally)


def new_accumulator(width: int) -> np.ndarray:
    return np.zeros(width, dtype=np.float32)


def _check_range(block: Block, query: np.ndarray, dim_range):
    a, b = dim_range
    if query.shape[0] != block.d:
        raise ValueError(f"query length {query.shape[0]} != block dimensionality {block.d}")
    if not 0 <= a <= b <= block.d:
        raise ValueError(f"dimension range [{a}, {b}) out of bounds for d={block.d}")
    return a, b


def vertical_accumulate(block: Block, query: np.ndarray, dim_range, metric: Metric,
                        acc: np.ndarray, order=None) -> np.ndarray:
    """Accumulate partial distances for every slot over dims ``[a, b)``.

    With ``order`` (a permutation of 0..d-1), the range indexes into the
    permuted dimension sequence instead of the natural one.
    """
    query = np.asarray(query, dtype=np.float32)
    a, b = _check_range(block, query, dim_range)
    dims = range(a, b) if order is None else order[a:b]
    data = block.data
    for j in dims:
        col = data[j]
        q = query[j]
        if metric is Metric.L2:
            t = q - col
            acc += t * t
        elif metric is Metric.L1:
            acc += np.abs(q - col)
        else:
            acc += q * col
    return acc


def vertical_accumulate_selected(block: Block, query: np.ndarray, dim_range,
                                 metric: Metric, acc: np.ndarray, positions: np.ndarray,
                                 order=None) -> np.ndarray:
    """Like :func:`vertical_accumulate` but only for the listed slots.

    Slots not in ``positions`` are left bit-unchanged.
    """
    query = np.asarray(query, dtype=np.float32)
    a, b = _check_range(block, query, dim_range)
    positions = np.asarray(positions, dtype=np.intp)
    if positions.size and positions.max() >= block.m:
        raise ValueError("position beyond the block's vector count")
    if positions.size == 0:
        return acc
    dims = range(a, b) if order is None else order[a:b]
    data = block.data
    for j in dims:
        col = data[j, positions]
        q = query[j]
        if metric is Metric.L2:
            t = q - col
            acc[positions] += t * t
        elif metric is Metric.L1:
            acc[positions] += np.abs(q - col)
        else:
            acc[positions] += q * col
    return acc


def horizontal_distance(vector, query, metric: Metric) -> float:
    """Scalar reference distance with 64-bit accumulation."""
    v = np.asarray(vector, dtype=np.float64)
    q = np.asarray(query, dtype=np.float64)
    if v.shape != q.shape:
        raise ValueError(f"length mismatch: {v.shape} vs {q.shape}")
    if metric is Metric.L2:
        t = v - q
        return float(np.dot(t, t))
    if metric is Metric.L1:
        return float(np.sum(np.abs(v - q)))
    return float(np.dot(v, q))


def horizontal_distance_batch(matrix, query, metric: Metric) -> np.ndarray:
    """Row-wise :func:`horizontal_distance` over a row-major matrix."""
    x = np.asarray(matrix, dtype=np.float64)
    q = np.asarray(query, dtype=np.float64)
    if x.shape[1] != q.shape[0]:
        raise ValueError(f"dimensionality mismatch: {x.shape[1]} vs {q.shape[0]}")
    if metric is Metric.L2:
        t = x - q
        return np.einsum("ij,ij->i", t, t)
    if metric is Metric.L1:
        return np.sum(np.abs(x - q), axis=1)
    return x @ q
