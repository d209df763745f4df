"""Time the numba kernels against their pure-numpy fallbacks.

    python benchmarks/bench_kernels.py [--nodes 20000] [--dim 64] [--repeat 5]

Each line reports the best of ``--repeat`` runs after one warm-up call (which
also triggers JIT compilation). With ARCGAD_DISABLE_NUMBA set, only the numpy
column is timed.
"""
import argparse
import time

import numpy as np

from arcgad import _accel, kernels
from arcgad.graph import EdgeList, build_csr, normalize_adjacency


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def random_graph(rng, n, avg_degree):
    m = int(n * avg_degree / 2)
    pairs = rng.integers(0, n, size=(m, 2))
    return EdgeList.from_pairs(pairs, n)


def row(name, numba_fn, numpy_fn, repeat):
    t_np = best_of(numpy_fn, repeat)
    if _accel.HAVE_NUMBA:
        t_nb = best_of(numba_fn, repeat)
        print(f"{name:<28} numba {t_nb * 1e3:9.2f} ms   numpy {t_np * 1e3:9.2f} ms   speedup {t_np / t_nb:6.1f}x")
    else:
        print(f"{name:<28} numba       n/a      numpy {t_np * 1e3:9.2f} ms")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=20000)
    ap.add_argument("--degree", type=float, default=10.0)
    ap.add_argument("--dim", type=int, default=64)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    edges = random_graph(rng, args.nodes, args.degree)
    g = normalize_adjacency(build_csr(edges))
    x = rng.normal(size=(args.nodes, args.dim))
    src, dst = edges.pairs[:, 0], edges.pairs[:, 1]
    print(f"backend={_accel.backend()} n={args.nodes} edges={edges.n_edges} d={args.dim}")

    row(
        "spmm",
        lambda: kernels.csr_spmm_numba(g.indptr, g.indices, g.data, x),
        lambda: kernels.csr_spmm_numpy(g.indptr, g.indices, g.data, x),
        args.repeat,
    )
    row(
        "edge smoothness",
        lambda: kernels.edge_smoothness_numba(src, dst, x),
        lambda: kernels.edge_smoothness_numpy(src, dst, x),
        args.repeat,
    )


if __name__ == "__main__":
    main()
