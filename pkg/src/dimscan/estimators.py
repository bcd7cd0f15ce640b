"""Scikit-learn style estimators wrapping the flat and bucket searches.

Both follow the ``NearestNeighbors`` idiom: ``fit(X)`` builds the
structure, ``kneighbors(Q)`` returns ``(distances, indices)``.  Params
round-trip through ``get_params``/``set_params`` so the estimators
compose with pipelines and ``clone``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .index import (DEFAULT_PARTITION_SIZE, exact_search, flat_build, ivf_build,
                    ivf_search)
from .kernels import Metric
from .layout import VectorCollection
from .pruning import AdsPruner, OrderCriteria, apply_transform, generate_orthogonal
from .search import (DEFAULT_INITIAL_STEP, DEFAULT_SELECTION_FRACTION,
                     SearchParams)


def _as_results(topk, k: int):
    items = topk.items()
    dists = np.full(k, np.inf)
    ids = np.full(k, -1, dtype=np.int64)
    for j, (dist, vid) in enumerate(items[:k]):
        dists[j] = dist
        ids[j] = vid
    return dists, ids


class ExactNearestNeighbors(BaseEstimator):
    """Exact k-nearest-neighbor search over horizontal partitions.

    With ``pruner="bond"`` the partial-distance lower bound skips work
    without changing results; ``pruner="none"`` is a plain linear scan.
    """

    def __init__(self, metric="l2", pruner="bond", criteria="dmeans",
                 partition_size=DEFAULT_PARTITION_SIZE, zone_width=None,
                 selection_fraction=DEFAULT_SELECTION_FRACTION,
                 initial_step=DEFAULT_INITIAL_STEP):
        self.metric = metric
        self.pruner = pruner
        self.criteria = criteria
        self.partition_size = partition_size
        self.zone_width = zone_width
        self.selection_fraction = selection_fraction
        self.initial_step = initial_step

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float32)
        collection = VectorCollection.from_array(X)
        self.partitioning_ = flat_build(collection, self.partition_size)
        self.n_features_in_ = collection.d
        return self

    def kneighbors(self, X, n_neighbors=10):
        check_is_fitted(self, "partitioning_")
        X = check_array(X, dtype=np.float32)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"query dimensionality {X.shape[1]} != {self.n_features_in_}")
        params = SearchParams(k=n_neighbors, metric=Metric(self.metric),
                              pruner=self.pruner,
                              selection_fraction=self.selection_fraction,
                              initial_step=self.initial_step)
        dists = np.empty((X.shape[0], n_neighbors))
        ids = np.empty((X.shape[0], n_neighbors), dtype=np.int64)
        for qi, q in enumerate(X):
            topk = exact_search(self.partitioning_, q, params,
                                criteria=OrderCriteria(self.criteria),
                                zone_width=self.zone_width)
            dists[qi], ids[qi] = _as_results(topk, n_neighbors)
        return dists, ids


class IvfNearestNeighbors(BaseEstimator):
    """Approximate (or exact at full probe count) bucket-index search."""

    def __init__(self, metric="l2", pruner="none", criteria="sequential",
                 nlist=None, nprobe=8, block_size=64, epsilon0=2.1,
                 zone_width=None, selection_fraction=DEFAULT_SELECTION_FRACTION,
                 initial_step=DEFAULT_INITIAL_STEP, seed=0):
        self.metric = metric
        self.pruner = pruner
        self.criteria = criteria
        self.nlist = nlist
        self.nprobe = nprobe
        self.block_size = block_size
        self.epsilon0 = epsilon0
        self.zone_width = zone_width
        self.selection_fraction = selection_fraction
        self.initial_step = initial_step
        self.seed = seed

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float32)
        self.n_features_in_ = X.shape[1]
        self.transform_ = None
        if self.pruner == "ads":
            # cluster the rotated data so search and index share one space
            self.transform_ = generate_orthogonal(X.shape[1], self.seed)
            X = apply_transform(self.transform_, X)
        collection = VectorCollection.from_array(X)
        self.index_ = ivf_build(collection, nlist=self.nlist, seed=self.seed,
                                block_size=self.block_size)
        return self

    def kneighbors(self, X, n_neighbors=10, nprobe=None):
        check_is_fitted(self, "index_")
        X = check_array(X, dtype=np.float32)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"query dimensionality {X.shape[1]} != {self.n_features_in_}")
        if self.transform_ is not None:
            X = apply_transform(self.transform_, X)
        nprobe = self.nprobe if nprobe is None else nprobe
        nprobe = min(nprobe, self.index_.nlist)
        params = SearchParams(k=n_neighbors, metric=Metric(self.metric),
                              pruner=self.pruner,
                              selection_fraction=self.selection_fraction,
                              initial_step=self.initial_step,
                              ads=AdsPruner(d=self.n_features_in_, epsilon0=self.epsilon0))
        dists = np.empty((X.shape[0], n_neighbors))
        ids = np.empty((X.shape[0], n_neighbors), dtype=np.int64)
        for qi, q in enumerate(X):
            topk = ivf_search(self.index_, q, params, nprobe,
                              criteria=OrderCriteria(self.criteria),
                              zone_width=self.zone_width)
            dists[qi], ids[qi] = _as_results(topk, n_neighbors)
        return dists, ids
