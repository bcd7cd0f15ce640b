"""Adaptive dimension-by-dimension search over a sequence of blocks.

The first block is scanned fully to seed the pruning threshold.  Every
later block goes through two phases: a warmup that accumulates
exponentially growing dimension steps for all slots while tracking prune
flags, and a prune phase that, once few enough slots survive, restricts
the kernel to the survivors' positions.  Prune decisions run in a pass
separate from the distance accumulation.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

import numpy as np

from .kernels import Metric, new_accumulator, vertical_accumulate, vertical_accumulate_selected
from .layout import Block
from .pruning import AdsPruner, ads_bound

DEFAULT_SELECTION_FRACTION = 0.20
DEFAULT_INITIAL_STEP = 2


class TopK:
    """Bounded max-heap of (distance, id); the worst member is the
    pruning threshold once the heap is full."""

    def __init__(self, k: int):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = k
        self._heap: list[tuple[float, int]] = []  # (-distance, -id)

    def __len__(self) -> int:
        return len(self._heap)

    def threshold(self) -> float:
        if len(self._heap) < self.k:
            return float("inf")
        return -self._heap[0][0]

    def push(self, distance: float, vid: int):
        item = (-distance, -vid)
        if len(self._heap) < self.k:
            heapq.heappush(self._heap, item)
        elif item > self._heap[0]:
            # strictly better: smaller distance, or same distance + lower id
            heapq.heapreplace(self._heap, item)

    def items(self) -> list[tuple[float, int]]:
        """(distance, id) pairs, ascending distance, ids ascending on ties."""
        return sorted((-d, -i) for d, i in self._heap)

    def ids(self) -> list[int]:
        return [i for _, i in self.items()]


@dataclass
class SearchParams:
    k: int
    metric: Metric = Metric.L2
    pruner: str = "none"  # {"none", "ads", "bond"}
    selection_fraction: float = DEFAULT_SELECTION_FRACTION
    initial_step: int = DEFAULT_INITIAL_STEP
    ads: AdsPruner | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not 0.0 < self.selection_fraction <= 1.0:
            raise ValueError("selection_fraction must be in (0, 1]")
        if self.initial_step < 1:
            raise ValueError("initial_step must be >= 1")
        self.metric = Metric(self.metric)
        if self.pruner not in ("none", "ads", "bond"):
            raise ValueError(f"unknown pruner: {self.pruner!r}")
        if self.pruner == "bond" and self.metric is Metric.IP:
            raise ValueError("inner product has no monotone lower bound; "
                             "use pruner='none' for IP searches")
        if self.pruner == "ads":
            if self.metric is not Metric.L2:
                raise ValueError("the ads pruner applies to squared L2 only")


@dataclass
class SearchStats:
    """Wall-clock and work accounting filled in during a search."""

    distance_seconds: float = 0.0
    bounds_seconds: float = 0.0
    values_touched: int = 0
    values_total: int = 0
    survivors: list[list[int]] = field(default_factory=list)

    @property
    def pruning_power(self) -> float:
        """Fraction of scalar dimension values never touched."""
        if self.values_total == 0:
            return 0.0
        return 1.0 - self.values_touched / self.values_total


def step_schedule(d: int, initial_step: int = DEFAULT_INITIAL_STEP) -> list[tuple[int, int]]:
    """Exponentially widening dimension ranges covering [0, d) exactly."""
    if d < 1:
        raise ValueError("dimensionality must be >= 1")
    ranges = []
    start, width = 0, initial_step
    while start < d:
        end = min(start + width, d)
        ranges.append((start, end))
        start = end
        width *= 2
    return ranges


def _merge_key(acc_value: float, metric: Metric) -> float:
    # IP is a similarity: maximize, i.e. minimize its negation
    return -acc_value if metric is Metric.IP else acc_value


def _linear_block(block: Block, query, params: SearchParams, topk: TopK,
                  order, stats: SearchStats | None):
    t0 = time.perf_counter()
    acc = new_accumulator(block.m_padded)
    vertical_accumulate(block, query, (0, block.d), params.metric, acc, order=order)
    if stats is not None:
        stats.distance_seconds += time.perf_counter() - t0
        stats.values_touched += block.m * block.d
        stats.survivors.append([block.m])
    for i in range(block.m):
        topk.push(_merge_key(float(acc[i]), params.metric), int(block.ids[i]))


def _search_block(block: Block, query, params: SearchParams, topk: TopK,
                  order, stats: SearchStats | None):
    schedule = step_schedule(block.d, params.initial_step)
    acc = new_accumulator(block.m_padded)
    positions = np.arange(block.m, dtype=np.intp)
    warmup = True  # all slots are still accumulated; break-off is deferred
    dims_seen = 0
    survivors = []
    for a, b in schedule:
        t0 = time.perf_counter()
        if warmup and (len(positions) / block.m) >= params.selection_fraction:
            vertical_accumulate(block, query, (a, b), params.metric, acc, order=order)
            touched = block.m
        else:
            warmup = False
            vertical_accumulate_selected(block, query, (a, b), params.metric, acc,
                                         positions, order=order)
            touched = len(positions)
        t1 = time.perf_counter()
        dims_seen = b
        # decision pass, separate from the distance pass
        threshold = topk.threshold()
        if threshold != float("inf"):
            if params.pruner == "ads":
                bound = ads_bound(dims_seen, params.ads, threshold)
                positions = positions[acc[positions] < bound]
            else:  # bond
                positions = positions[acc[positions] < threshold]
        if stats is not None:
            stats.bounds_seconds += time.perf_counter() - t1
            stats.distance_seconds += t1 - t0
            stats.values_touched += touched * (b - a)
        survivors.append(len(positions))
    if stats is not None:
        stats.survivors.append(survivors)
    for i in positions:
        topk.push(_merge_key(float(acc[i]), params.metric), int(block.ids[i]))


def search(blocks: list[Block], query, params: SearchParams,
           orders=None, stats: SearchStats | None = None) -> TopK:
    """Search an ordered block sequence and return the top-k heap.

    ``orders`` optionally gives a dimension-visit permutation, either one
    array shared by every block or a per-block list (an IVF search orders
    each bucket's dimensions by that bucket's own means).  For the ads
    pruner the query must already be rotated and the blocks hold rotated
    data.
    """
    topk = TopK(params.k)
    if not blocks:
        return topk
    query = np.asarray(query, dtype=np.float32)
    d = blocks[0].d
    if query.shape != (d,):
        raise ValueError(f"query length {query.shape} does not match d={d}")
    if params.pruner == "ads" and params.ads is None:
        params.ads = AdsPruner(d=d)
    per_block = orders is not None and isinstance(orders, (list, tuple))
    if stats is not None:
        stats.values_total += sum(b.m * b.d for b in blocks)
    for bi, block in enumerate(blocks):
        order = (orders[bi] if per_block else orders) if orders is not None else None
        if bi == 0 or params.pruner == "none" or topk.threshold() == float("inf"):
            _linear_block(block, query, params, topk, order, stats)
        else:
            _search_block(block, query, params, topk, order, stats)
    return topk


def pruning_power_trace(blocks: list[Block], query, params: SearchParams,
                        orders=None) -> SearchStats:
    """Run a search and return its survival counts and pruning power."""
    stats = SearchStats()
    search(blocks, query, params, orders=orders, stats=stats)
    return stats
