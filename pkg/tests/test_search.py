import numpy as np
import pytest

from dimscan import (Metric, SearchParams, TopK, VectorCollection,
                     compute_ground_truth, gen_synthetic, pruning_power_trace,
                     search, step_schedule, to_blocks)
from dimscan.pruning import OrderCriteria, bond_dimension_order
from dimscan.layout import compute_means


def test_schedule_examples():
    assert [b - a for a, b in step_schedule(100, 2)] == [2, 4, 8, 16, 32, 38]
    assert [b - a for a, b in step_schedule(2, 2)] == [2]
    assert [b - a for a, b in step_schedule(3, 2)] == [2, 1]


def test_schedule_covers_exactly():
    for d in (1, 5, 64, 1000):
        for step in (1, 2, 8):
            ranges = step_schedule(d, step)
            assert ranges[0][0] == 0 and ranges[-1][1] == d
            for (a, b), (c, e) in zip(ranges, ranges[1:]):
                assert b == c


def test_topk_threshold_and_order():
    tk = TopK(2)
    assert tk.threshold() == float("inf")
    tk.push(3.0, 1)
    tk.push(1.0, 2)
    tk.push(2.0, 3)
    assert tk.threshold() == 2.0
    assert tk.items() == [(1.0, 2), (2.0, 3)]


def test_topk_tie_prefers_lower_id():
    tk = TopK(1)
    tk.push(1.0, 5)
    tk.push(1.0, 3)
    assert tk.ids() == [3]


def _setup(n=3000, d=64, seed=0, metric=Metric.L2, dist="normal"):
    col = gen_synthetic(n, d, dist, seed)
    q = np.random.default_rng(seed + 1).standard_normal(d).astype(np.float32)
    truth = compute_ground_truth(col, q, 10, metric)
    return col, q, truth


def test_linear_scan_matches_oracle():
    col, q, truth = _setup()
    topk = search(to_blocks(col, 64), q, SearchParams(k=10, pruner="none"))
    assert topk.ids() == truth.ids[0].tolist()


def test_single_block_is_exact():
    col, q, truth = _setup(n=50)
    topk = search(to_blocks(col, 64), q, SearchParams(k=10))
    assert topk.ids() == truth.ids[0].tolist()


def test_empty_block_list_gives_empty_topk():
    topk = search([], np.zeros(4, np.float32), SearchParams(k=5))
    assert len(topk) == 0


def test_dimension_mismatch_rejected():
    col, _, _ = _setup(n=10, d=8)
    with pytest.raises(ValueError):
        search(to_blocks(col, 64), np.zeros(9, np.float32), SearchParams(k=1))


@pytest.mark.parametrize("metric", [Metric.L2, Metric.L1])
def test_bond_matches_brute_force(metric):
    col, q, truth = _setup(metric=metric)
    params = SearchParams(k=10, metric=metric, pruner="bond")
    topk = search(to_blocks(col, 64), q, params)
    assert sorted(topk.ids()) == sorted(truth.ids[0].tolist())


def test_bond_with_ordering_matches_brute_force():
    col, q, truth = _setup(dist="skewed")
    order = bond_dimension_order(q, compute_means(col).means,
                                 OrderCriteria.DISTANCE_TO_MEANS)
    params = SearchParams(k=10, pruner="bond")
    topk = search(to_blocks(col, 64), q, params, orders=order)
    assert sorted(topk.ids()) == sorted(truth.ids[0].tolist())


def test_ip_search_maximizes():
    col, q, truth = _setup(metric=Metric.IP)
    topk = search(to_blocks(col, 64), q, SearchParams(k=10, metric=Metric.IP))
    assert sorted(topk.ids()) == sorted(truth.ids[0].tolist())


def test_ip_with_pruner_rejected():
    with pytest.raises(ValueError):
        SearchParams(k=1, metric=Metric.IP, pruner="bond")
    with pytest.raises(ValueError):
        SearchParams(k=1, metric=Metric.IP, pruner="ads")


def test_ads_requires_l2():
    with pytest.raises(ValueError):
        SearchParams(k=1, metric=Metric.L1, pruner="ads")


def test_schedule_invariance_for_exact_pruners():
    col, q, _ = _setup(dist="skewed")
    blocks = to_blocks(col, 64)
    baseline = None
    for step in (1, 2, 8):
        for fraction in (0.05, 0.20, 0.40):
            params = SearchParams(k=10, pruner="bond",
                                  selection_fraction=fraction, initial_step=step)
            ids = sorted(search(blocks, q, params).ids())
            if baseline is None:
                baseline = ids
            assert ids == baseline


def test_ads_deterministic_across_runs():
    col, q, _ = _setup()
    blocks = to_blocks(col, 64)
    params = SearchParams(k=10, pruner="ads")
    a = search(blocks, q, params).ids()
    b = search(blocks, q, params).ids()
    assert a == b


def test_trace_no_pruner_never_prunes():
    col, q, _ = _setup(n=500)
    stats = pruning_power_trace(to_blocks(col, 64), q, SearchParams(k=10, pruner="none"))
    assert stats.pruning_power == 0.0
    assert all(s == [m] for s, m in zip(stats.survivors, [64] * 7 + [52]))


def test_trace_heap_never_full_no_pruning():
    col, q, _ = _setup(n=100)
    stats = pruning_power_trace(to_blocks(col, 64), q,
                                SearchParams(k=200, pruner="bond"))
    assert stats.pruning_power == 0.0


def test_trace_survivors_monotone_and_power_positive():
    col, q, _ = _setup(n=4000, d=128, dist="skewed")
    stats = pruning_power_trace(to_blocks(col, 64), q, SearchParams(k=10, pruner="bond"))
    assert 0.0 < stats.pruning_power < 1.0
    for survivors in stats.survivors[1:]:
        assert all(a >= b for a, b in zip(survivors, survivors[1:]))


def test_trace_separating_dimension_collapses_survivors():
    # one dimension pushes everything except the true neighbors far away
    rng = np.random.default_rng(12)
    data = rng.standard_normal((256, 16)).astype(np.float32) * 0.01
    data[10:, 0] += 100.0  # everything past the first 10 is hopeless on dim 0
    col = VectorCollection.from_array(data)
    q = np.zeros(16, dtype=np.float32)
    stats = pruning_power_trace(to_blocks(col, 64), q,
                                SearchParams(k=10, pruner="bond", initial_step=1))
    # every later block discards all members at the first step
    for survivors in stats.survivors[1:]:
        assert survivors[0] == 0
