"""Bucket index (Lloyd k-means) and flat partitioning.

Both produce ordered block sequences that the adaptive search consumes:
the bucket index yields the blocks of the ``nprobe`` nearest buckets,
closest centroid first; the flat partitioning yields one wide block per
horizontal partition, in input order.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .kernels import Metric, new_accumulator, vertical_accumulate
from .layout import Block, VectorCollection, compute_means, to_blocks
from .pruning import OrderCriteria, bond_dimension_order
from .search import SearchParams, SearchStats, TopK, search

DEFAULT_PARTITION_SIZE = 10_000
DEFAULT_KMEANS_ITERS = 20
KMEANS_SHIFT_TOL = 1e-4


def lloyd_kmeans(data: np.ndarray, nlist: int, seed: int,
                 max_iters: int = DEFAULT_KMEANS_ITERS):
    """Plain Lloyd iterations from a seeded random sample.

    Empty clusters are repaired by splitting the largest cluster: its
    farthest member becomes the empty cluster's new centroid.
    Returns (centroids, assignments).
    """
    n = data.shape[0]
    if not 1 <= nlist <= n:
        raise ValueError(f"nlist must be in [1, {n}], got {nlist}")
    rng = np.random.default_rng(seed)
    centroids = data[rng.choice(n, size=nlist, replace=False)].astype(np.float32)
    assign = np.zeros(n, dtype=np.intp)
    for _ in range(max_iters):
        dists = _pairwise_l2(data, centroids)
        assign = np.argmin(dists, axis=1)
        new_centroids = centroids.copy()
        for c in range(nlist):
            members = data[assign == c]
            if len(members):
                new_centroids[c] = members.astype(np.float64).mean(axis=0)
        for c in range(nlist):
            if not np.any(assign == c):
                largest = np.bincount(assign, minlength=nlist).argmax()
                members = np.flatnonzero(assign == largest)
                gaps = _pairwise_l2(data[members], new_centroids[largest][None, :])[:, 0]
                stray = members[np.argmax(gaps)]
                new_centroids[c] = data[stray]
                assign[stray] = c
        shift = np.linalg.norm(new_centroids - centroids, axis=1)
        scale = np.linalg.norm(centroids, axis=1) + 1e-30
        centroids = new_centroids
        if np.max(shift / scale) < KMEANS_SHIFT_TOL:
            break
    dists = _pairwise_l2(data, centroids)
    assign = np.argmin(dists, axis=1)
    return centroids, assign


def _pairwise_l2(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    x = x.astype(np.float32, copy=False)
    c = c.astype(np.float32, copy=False)
    xx = np.einsum("ij,ij->i", x, x)[:, None]
    cc = np.einsum("ij,ij->i", c, c)[None, :]
    return np.maximum(xx + cc - 2.0 * (x @ c.T), 0.0)


@dataclass(frozen=True)
class IvfIndex:
    """k-means buckets; centroids stored as a dimension-major chain."""

    nlist: int
    centroid_blocks: list[Block]
    centroids: np.ndarray  # (nlist, d) float32, row-major copy for repair/oracle use
    buckets: list[list[Block]]  # one block chain per bucket
    bucket_means: list[np.ndarray]  # per-bucket per-dimension means, float64
    training_seed: int

    @property
    def d(self) -> int:
        return self.centroids.shape[1]


def ivf_build(collection: VectorCollection, nlist: int | None = None,
              seed: int = 0, max_iters: int = DEFAULT_KMEANS_ITERS,
              block_size: int = 64) -> IvfIndex:
    """Cluster the collection and store each bucket as a block chain."""
    if nlist is None:
        nlist = max(1, round(math.sqrt(collection.n)))
    centroids, assign = lloyd_kmeans(collection.data, nlist, seed, max_iters)
    buckets, bucket_means = [], []
    for c in range(nlist):
        members = np.flatnonzero(assign == c)
        part = VectorCollection(data=collection.data[members], ids=collection.ids[members])
        buckets.append(to_blocks(part, block_size))
        bucket_means.append(compute_means(part).means if part.n else
                            centroids[c].astype(np.float64))
    centroid_chain = to_blocks(
        VectorCollection.from_array(centroids), block_size)
    return IvfIndex(nlist=nlist, centroid_blocks=centroid_chain, centroids=centroids,
                    buckets=buckets, bucket_means=bucket_means, training_seed=seed)


def ivf_select_buckets(index: IvfIndex, query, nprobe: int,
                       metric: Metric = Metric.L2) -> np.ndarray:
    """The nprobe nearest buckets, ascending centroid distance, using the
    vertical kernel over the centroid chain."""
    if not 1 <= nprobe <= index.nlist:
        raise ValueError(f"nprobe must be in [1, {index.nlist}], got {nprobe}")
    query = np.asarray(query, dtype=np.float32)
    dists = np.empty(index.nlist, dtype=np.float32)
    pos = 0
    for block in index.centroid_blocks:
        acc = new_accumulator(block.m_padded)
        vertical_accumulate(block, query, (0, block.d), metric, acc)
        dists[pos:pos + block.m] = acc[:block.m]
        pos += block.m
    key = -dists if metric is Metric.IP else dists
    order = np.argsort(key, kind="stable")
    return order[:nprobe]


def ivf_search(index: IvfIndex, query, params: SearchParams, nprobe: int,
               criteria: OrderCriteria = OrderCriteria.SEQUENTIAL,
               zone_width: int | None = None,
               stats: SearchStats | None = None,
               phase_times: dict | None = None) -> TopK:
    """Adaptive search over the selected buckets' blocks."""
    t0 = time.perf_counter()
    selected = ivf_select_buckets(index, query, nprobe, params.metric)
    t1 = time.perf_counter()
    blocks, orders = [], []
    for b in selected:
        if params.pruner == "bond" and criteria is not OrderCriteria.SEQUENTIAL:
            order = bond_dimension_order(query, index.bucket_means[b], criteria, zone_width)
        else:
            order = None
        for block in index.buckets[b]:
            blocks.append(block)
            orders.append(order)
    t2 = time.perf_counter()
    topk = search(blocks, query, params, orders=orders, stats=stats)
    if phase_times is not None:
        phase_times["find_nearest_buckets"] = t1 - t0
        phase_times["query_preprocessing"] = phase_times.get("query_preprocessing", 0.0) + (t2 - t1)
        if stats is not None:
            phase_times["distance_calculation"] = stats.distance_seconds
            phase_times["bounds_evaluation"] = stats.bounds_seconds
    return topk


@dataclass(frozen=True)
class FlatPartitioning:
    """Equally sized horizontal partitions, each one wide block."""

    partitions: list[Block]
    global_means: np.ndarray  # float64

    @property
    def d(self) -> int:
        return self.partitions[0].d


def flat_build(collection: VectorCollection,
               partition_size: int = DEFAULT_PARTITION_SIZE) -> FlatPartitioning:
    if partition_size < 1:
        raise ValueError("partition_size must be >= 1")
    if collection.n == 0:
        raise ValueError("cannot partition an empty collection")
    partitions = to_blocks(collection, partition_size, pad=False)
    return FlatPartitioning(partitions=partitions,
                            global_means=compute_means(collection).means)


def exact_search(partitioning: FlatPartitioning, query, params: SearchParams,
                 criteria: OrderCriteria = OrderCriteria.SEQUENTIAL,
                 zone_width: int | None = None,
                 stats: SearchStats | None = None) -> TopK:
    """Search partitions in input order; exact for bond/none pruners."""
    if params.pruner == "bond" and criteria is not OrderCriteria.SEQUENTIAL:
        order = bond_dimension_order(query, partitioning.global_means, criteria, zone_width)
    else:
        order = None
    return search(partitioning.partitions, query, params, orders=order, stats=stats)
