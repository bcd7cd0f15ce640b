"""Pruning strategies: decide from a partial distance whether a vector
can still enter the top-k.

Two families are implemented:

* a probabilistic pruner over randomly rotated data, where the partial
  squared L2 over the first ``d'`` dims is an unbiased estimate of
  ``d'/d`` of the full distance and a confidence band governed by
  ``epsilon0`` inflates the comparison threshold, and
* an exact pruner that uses the partial distance itself as a lower bound
  (valid for L2/L1, whose partial sums only grow), paired with
  query-aware orders in which to visit dimensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np


@dataclass(frozen=True)
class OrthogonalTransform:
    """Seeded random rotation; preserves L2 distances."""

    matrix: np.ndarray  # shape (d, d), float32, orthonormal
    seed: int

    @property
    def d(self) -> int:
        return self.matrix.shape[0]


def generate_orthogonal(d: int, seed: int) -> OrthogonalTransform:
    """Orthonormalize a seeded Gaussian matrix (QR with sign fixing)."""
    if d < 1:
        raise ValueError("dimensionality must be >= 1")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    # sign-fix so the factorization (and hence the matrix) is unique
    q = q * np.sign(np.diag(r))
    return OrthogonalTransform(matrix=q.astype(np.float32), seed=seed)


def apply_transform(transform: OrthogonalTransform, x: np.ndarray) -> np.ndarray:
    """Rotate a vector or a row-major batch of vectors."""
    x = np.asarray(x, dtype=np.float32)
    if x.shape[-1] != transform.d:
        raise ValueError(f"length mismatch: {x.shape[-1]} vs {transform.d}")
    return x @ transform.matrix.T


@dataclass(frozen=True)
class AdsPruner:
    """Hypothesis-test pruner; operates on rotated data, L2 only."""

    d: int
    epsilon0: float = 2.1

    def __post_init__(self):
        if self.epsilon0 <= 0:
            raise ValueError("epsilon0 must be positive")


def ads_should_prune(partial_l2: float, dims_seen: int, pruner: AdsPruner,
                     threshold_l2: float) -> bool:
    """True iff the partial distance already exceeds the inflated bound.

    At full dimensionality the band collapses to the exact comparison.
    """
    if dims_seen < 1:
        raise ValueError("dims_seen must be >= 1")
    if dims_seen >= pruner.d:
        return partial_l2 >= threshold_l2
    ratio = dims_seen / pruner.d
    band = 1.0 + pruner.epsilon0 / math.sqrt(dims_seen)
    return partial_l2 >= threshold_l2 * ratio * band * band


def ads_bound(dims_seen: int, pruner: AdsPruner, threshold_l2: float) -> float:
    """The partial-distance bound the hypothesis test compares against."""
    if dims_seen >= pruner.d:
        return threshold_l2
    band = 1.0 + pruner.epsilon0 / math.sqrt(dims_seen)
    return threshold_l2 * (dims_seen / pruner.d) * band * band


class OrderCriteria(str, Enum):
    SEQUENTIAL = "sequential"
    DECREASING = "decreasing"
    DISTANCE_TO_MEANS = "dmeans"
    DIMENSION_ZONES = "zones"


def default_zone_width(d: int) -> int:
    return min(d, max(8, d // 16))


def bond_should_prune(partial: float, threshold: float) -> bool:
    """Exact test: a partial sum at the threshold can no longer improve."""
    return partial >= threshold


def bond_dimension_order(query: np.ndarray, means: np.ndarray,
                         criteria: OrderCriteria,
                         zone_width: int | None = None) -> np.ndarray:
    """Permutation fixing the order in which dimensions are visited.

    Ties are broken toward the lower dimension index so orders are
    deterministic.
    """
    query = np.asarray(query, dtype=np.float64)
    means = np.asarray(means, dtype=np.float64)
    if query.shape != means.shape:
        raise ValueError(f"length mismatch: {query.shape} vs {means.shape}")
    d = query.shape[0]
    criteria = OrderCriteria(criteria)
    if criteria is OrderCriteria.SEQUENTIAL:
        return np.arange(d, dtype=np.intp)
    if criteria is OrderCriteria.DECREASING:
        return np.argsort(-query, kind="stable").astype(np.intp)
    gaps = np.abs(query - means)
    if criteria is OrderCriteria.DISTANCE_TO_MEANS:
        return np.argsort(-gaps, kind="stable").astype(np.intp)
    # dimension zones: rank runs of consecutive dims by their summed gap,
    # keeping sequential order inside each run
    if zone_width is None:
        zone_width = default_zone_width(d)
    if zone_width < 1:
        raise ValueError("zone_width must be >= 1")
    starts = np.arange(0, d, zone_width)
    scores = np.array([gaps[s:s + zone_width].sum() for s in starts])
    zone_order = np.argsort(-scores, kind="stable")
    order = np.concatenate([
        np.arange(starts[z], min(starts[z] + zone_width, d)) for z in zone_order
    ])
    return order.astype(np.intp)
