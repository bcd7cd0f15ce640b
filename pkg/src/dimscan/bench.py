"""Benchmark helpers: synthetic datasets, ground truth, recall, reports."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .kernels import Metric, horizontal_distance_batch
from .layout import VectorCollection


def gen_synthetic(n: int, d: int, distribution: str = "normal", seed: int = 0,
                  clusters: int = 8, return_labels: bool = False):
    """Deterministic synthetic collections.

    ``normal``: iid standard normal.  ``skewed``: lognormal per dimension
    with the log-scale spread across dimensions, so some dimensions
    dominate distances the way they do in skewed embedding collections.
    ``clustered``: Gaussian blobs around well-separated centers, with the
    blob labels available for index oracle tests.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be >= 1")
    rng = np.random.default_rng(seed)
    labels = None
    if distribution == "normal":
        data = rng.standard_normal((n, d))
    elif distribution == "skewed":
        sigma = np.linspace(0.3, 2.5, d)
        data = np.exp(rng.standard_normal((n, d)) * sigma)
    elif distribution == "clustered":
        centers = rng.standard_normal((clusters, d)) * 10.0
        labels = rng.integers(0, clusters, size=n)
        data = centers[labels] + rng.standard_normal((n, d))
    else:
        raise ValueError(f"unknown distribution: {distribution!r}")
    collection = VectorCollection.from_array(data.astype(np.float32))
    if return_labels:
        return collection, labels
    return collection


@dataclass(frozen=True)
class GroundTruth:
    """Exact top-k per query, 64-bit brute force, ties to the lower id."""

    ids: np.ndarray  # (nq, k) int64
    distances: np.ndarray  # (nq, k) float64


def compute_ground_truth(collection: VectorCollection, queries: np.ndarray,
                         k: int, metric: Metric = Metric.L2) -> GroundTruth:
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float32))
    if queries.shape[1] != collection.d:
        raise ValueError(f"query dimensionality {queries.shape[1]} != {collection.d}")
    k = min(k, collection.n)
    out_ids = np.empty((queries.shape[0], k), dtype=np.int64)
    out_dists = np.empty((queries.shape[0], k), dtype=np.float64)
    for qi, q in enumerate(queries):
        dists = horizontal_distance_batch(collection.data, q, metric)
        key = -dists if metric is Metric.IP else dists
        order = np.argsort(key, kind="stable")[:k]  # stable: lower id wins ties
        out_ids[qi] = collection.ids[order]
        out_dists[qi] = dists[order]
    return GroundTruth(ids=out_ids, distances=out_dists)


def recall_at_k(truth_ids, result_ids, k: int) -> float:
    """|intersection| / k for one query."""
    truth = set(int(i) for i in truth_ids[:k])
    found = set(int(i) for i in result_ids[:k])
    return len(truth & found) / k


def nearest_rank_percentile(values, pct: float) -> float:
    """Nearest-rank percentile (pct in [0, 100])."""
    ordered = sorted(values)
    if not ordered:
        raise ValueError("no values")
    rank = max(1, int(np.ceil(pct / 100.0 * len(ordered))))
    return ordered[rank - 1]


@dataclass
class RunReport:
    """One benchmark configuration's measurements."""

    config: dict
    recall_mean: float
    qps: float
    pruning_power: dict = field(default_factory=dict)  # mean/p25/p50/best/worst
    phase_seconds: dict = field(default_factory=dict)
    total_seconds: float = 0.0

    def to_record(self) -> dict:
        return {
            "config": self.config,
            "recall_mean": self.recall_mean,
            "qps": self.qps,
            "pruning_power": self.pruning_power,
            "phase_seconds": self.phase_seconds,
            "total_seconds": self.total_seconds,
        }


def summarize_pruning_power(per_query_powers) -> dict:
    powers = list(per_query_powers)
    if not powers:
        return {}
    return {
        "mean": float(np.mean(powers)),
        "p25": float(nearest_rank_percentile(powers, 25)),
        "p50": float(nearest_rank_percentile(powers, 50)),
        "best": float(max(powers)),
        "worst": float(min(powers)),
    }


class Stopwatch:
    """Accumulates wall-clock time across repeated sections."""

    def __init__(self):
        self.total = 0.0
        self._start = None

    def __enter__(self):
        self._start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.total += time.perf_counter() - self._start
        return False
