"""Benchmark command line: dataset generation, conversion, index building,
ground truth, query execution, and parameter sweeps.

Reports are line-delimited JSON records (one per configuration) so they
can be plotted or aggregated externally.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .bench import (GroundTruth, RunReport, Stopwatch, compute_ground_truth,
                    gen_synthetic, recall_at_k, summarize_pruning_power)
from .index import IvfIndex, ivf_build, ivf_search
from .kernels import Metric
from .layout import VectorCollection, compute_means, from_blocks, to_blocks
from .pruning import AdsPruner, OrderCriteria, apply_transform, generate_orthogonal
from .search import SearchParams, SearchStats, search
from .storage import (BlockStore, IvfSection, read_fvecs, read_ivecs, read_pdx,
                      write_fvecs, write_ivecs, write_pdx)

CRITERIA = {
    "sequential": OrderCriteria.SEQUENTIAL,
    "decreasing": OrderCriteria.DECREASING,
    "dmeans": OrderCriteria.DISTANCE_TO_MEANS,
    "zones": OrderCriteria.DIMENSION_ZONES,
}


def store_from_collection(collection: VectorCollection, block_size: int,
                          transform_seed=None) -> BlockStore:
    matrix = None
    if transform_seed is not None:
        transform = generate_orthogonal(collection.d, transform_seed)
        matrix = transform.matrix
        collection = VectorCollection(
            data=apply_transform(transform, collection.data), ids=collection.ids)
    return BlockStore(blocks=to_blocks(collection, block_size),
                      global_means=compute_means(collection).means,
                      block_size=block_size,
                      transform_seed=transform_seed, transform_matrix=matrix)


def store_from_ivf(index: IvfIndex, block_size: int,
                   transform_seed=None, transform_matrix=None) -> BlockStore:
    blocks, offsets = [], [0]
    for chain in index.buckets:
        blocks.extend(chain)
        offsets.append(len(blocks))
    collection = from_blocks(blocks) if blocks else None
    return BlockStore(
        blocks=blocks,
        global_means=compute_means(collection).means,
        block_size=block_size,
        transform_seed=transform_seed, transform_matrix=transform_matrix,
        ivf=IvfSection(nlist=index.nlist, training_seed=index.training_seed,
                       centroids=index.centroids,
                       bucket_offsets=np.asarray(offsets, dtype=np.uint32),
                       bucket_means=np.stack(index.bucket_means)))


def index_from_store(store: BlockStore) -> IvfIndex:
    ivf = store.ivf
    buckets = [store.blocks[ivf.bucket_offsets[b]:ivf.bucket_offsets[b + 1]]
               for b in range(ivf.nlist)]
    return IvfIndex(nlist=ivf.nlist,
                    centroid_blocks=to_blocks(
                        VectorCollection.from_array(ivf.centroids), store.block_size),
                    centroids=ivf.centroids, buckets=buckets,
                    bucket_means=list(ivf.bucket_means),
                    training_seed=ivf.training_seed)


def _load_collection(path) -> VectorCollection:
    if str(path).endswith(".pdx"):
        return from_blocks(read_pdx(path).blocks)
    return read_fvecs(path)


def _emit(records, out):
    text = "\n".join(json.dumps(r) for r in records) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as f:
            f.write(text)


def cmd_gen(args):
    collection = gen_synthetic(args.n, args.d, args.distribution, args.seed,
                               clusters=args.clusters)
    write_fvecs(collection, args.out)


def cmd_convert(args):
    src, dst = args.dataset, args.out
    if str(src).endswith(".pdx"):
        write_fvecs(from_blocks(read_pdx(src).blocks), dst)
    else:
        store = store_from_collection(read_fvecs(src), args.block_size,
                                      transform_seed=args.transform_seed)
        write_pdx(store, dst)


def cmd_build_ivf(args):
    collection = _load_collection(args.dataset)
    seed, matrix = None, None
    if args.pruner == "ads":
        seed = args.seed
        transform = generate_orthogonal(collection.d, seed)
        matrix = transform.matrix
        collection = VectorCollection(
            data=apply_transform(transform, collection.data), ids=collection.ids)
    index = ivf_build(collection, nlist=args.nlist, seed=args.seed,
                      block_size=args.block_size)
    write_pdx(store_from_ivf(index, args.block_size, seed, matrix), args.out)


def cmd_ground_truth(args):
    collection = _load_collection(args.dataset)
    queries = read_fvecs(args.queries)
    truth = compute_ground_truth(collection, queries.data, args.k, Metric(args.metric))
    write_ivecs(truth.ids.astype(np.int32), args.out)


def _run_queries(store: BlockStore, queries: np.ndarray, args, nprobe=None,
                 selection_fraction=None):
    params = SearchParams(
        k=args.k, metric=Metric(args.metric), pruner=args.pruner,
        selection_fraction=(args.selection_fraction if selection_fraction is None
                            else selection_fraction),
        initial_step=args.initial_step,
        ads=AdsPruner(d=store.d, epsilon0=args.epsilon0))
    criteria = CRITERIA[args.criteria]
    if args.pruner == "ads":
        if store.transform_matrix is None:
            raise SystemExit(f"{args.dataset}: store carries no rotation matrix; "
                             "rebuild with --pruner ads")

    def one(q, stats=None, phase_times=None):
        prep = Stopwatch()
        with prep:
            if store.transform_matrix is not None and args.pruner == "ads":
                q = q @ store.transform_matrix.T
        if store.ivf is not None:
            index = one.index
            topk = ivf_search(index, q, params, nprobe or min(args.nprobe, index.nlist),
                              criteria=criteria, stats=stats, phase_times=phase_times)
        else:
            orders = None
            if params.pruner == "bond" and criteria is not OrderCriteria.SEQUENTIAL:
                with prep:
                    from .pruning import bond_dimension_order
                    orders = bond_dimension_order(q, store.global_means, criteria)
            topk = search(store.blocks, q, params, orders=orders, stats=stats)
            if phase_times is not None and stats is not None:
                phase_times["distance_calculation"] = stats.distance_seconds
                phase_times["bounds_evaluation"] = stats.bounds_seconds
        if phase_times is not None:
            phase_times["query_preprocessing"] = (
                phase_times.get("query_preprocessing", 0.0) + prep.total)
        return topk

    one.index = index_from_store(store) if store.ivf is not None else None

    # untimed warm pass
    one(queries[0])
    results, powers = [], []
    phase_totals: dict = {}
    t0 = time.perf_counter()
    for q in queries:
        stats = SearchStats()
        phase_times: dict = {}
        topk = one(q, stats, phase_times)
        results.append(topk.ids())
        powers.append(stats.pruning_power)
        for key, val in phase_times.items():
            phase_totals[key] = phase_totals.get(key, 0.0) + val
    total = time.perf_counter() - t0
    return results, powers, phase_totals, total


def _report(args, store, queries, truth, nprobe=None, selection_fraction=None) -> RunReport:
    results, powers, phases, total = _run_queries(store, queries, args, nprobe,
                                                  selection_fraction)
    if truth is not None:
        recalls = [recall_at_k(truth[qi], results[qi], args.k)
                   for qi in range(len(results))]
        recall_mean = float(np.mean(recalls))
    else:
        recall_mean = float("nan")
    config = {
        "dataset": str(args.dataset), "metric": args.metric, "k": args.k,
        "pruner": args.pruner, "criteria": args.criteria,
        "nprobe": nprobe or getattr(args, "nprobe", None),
        "selection_fraction": (selection_fraction if selection_fraction is not None
                               else args.selection_fraction),
        "epsilon0": args.epsilon0, "initial_step": args.initial_step,
    }
    return RunReport(config=config, recall_mean=recall_mean,
                     qps=len(queries) / total if total > 0 else float("inf"),
                     pruning_power=summarize_pruning_power(powers),
                     phase_seconds=phases, total_seconds=total)


def _load_truth(args):
    if args.ground_truth is None:
        return None
    return read_ivecs(args.ground_truth)


def cmd_query(args):
    store = read_pdx(args.dataset)
    queries = read_fvecs(args.queries).data
    report = _report(args, store, queries, _load_truth(args))
    _emit([report.to_record()], args.out)


def cmd_sweep(args):
    store = read_pdx(args.dataset)
    queries = read_fvecs(args.queries).data
    truth = _load_truth(args)
    records = []
    if store.ivf is not None:
        nprobes, p = [], 1
        while p < store.ivf.nlist:
            nprobes.append(p)
            p *= 2
        nprobes.append(store.ivf.nlist)
    else:
        nprobes = [None]
    fractions = args.selection_fractions or [args.selection_fraction]
    for nprobe in nprobes:
        for fraction in fractions:
            records.append(_report(args, store, queries, truth, nprobe,
                                   fraction).to_record())
    _emit(records, args.out)


def _add_query_flags(p):
    p.add_argument("--dataset", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--metric", choices=["l2", "l1", "ip"], default="l2")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--pruner", choices=["none", "ads", "bond"], default="none")
    p.add_argument("--criteria", choices=sorted(CRITERIA), default="sequential")
    p.add_argument("--epsilon0", type=float, default=2.1)
    p.add_argument("--selection-fraction", type=float, default=0.20)
    p.add_argument("--initial-step", type=int, default=2)
    p.add_argument("--nprobe", type=int, default=8)
    p.add_argument("--ground-truth", default=None)
    p.add_argument("--out", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dimscan")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic .fvecs dataset")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--distribution", choices=["normal", "skewed", "clustered"],
                   default="normal")
    p.add_argument("--clusters", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("convert", help="convert .fvecs <-> .pdx")
    p.add_argument("--dataset", required=True)
    p.add_argument("--block-size", type=int, default=64)
    p.add_argument("--transform-seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("build-ivf", help="build a bucket index store")
    p.add_argument("--dataset", required=True)
    p.add_argument("--nlist", type=int, default=None)
    p.add_argument("--block-size", type=int, default=64)
    p.add_argument("--pruner", choices=["none", "ads", "bond"], default="none")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_ivf)

    p = sub.add_parser("ground-truth", help="exact top-k ids to .ivecs")
    p.add_argument("--dataset", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--metric", choices=["l2", "l1", "ip"], default="l2")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ground_truth)

    p = sub.add_parser("query", help="run queries against a .pdx store")
    _add_query_flags(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("sweep", help="sweep nprobe and/or selection fraction")
    _add_query_flags(p)
    p.add_argument("--selection-fractions", type=float, nargs="*", default=None)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (OSError, ValueError) as exc:
        raise SystemExit(str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
