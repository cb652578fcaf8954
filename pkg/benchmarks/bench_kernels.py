"""Compare the compiled kernels with the pure-Python fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import time

import numpy as np

import mvongc.simplex_qp as sqp
from mvongc import _kernels_py
from mvongc.datasets import make_multiview_blobs
from mvongc.graphs import build_graphs
from mvongc.solver import SolverConfig, solve

try:
    from mvongc import _kernels as _compiled
except ImportError:
    _compiled = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    ys = [rng.standard_normal(3) for _ in range(2000)]
    qps = []
    for _ in range(200):
        B = rng.standard_normal((40, 3))
        Q = B.T @ B + 1e-10 * np.eye(3)
        V = B.T @ rng.standard_normal(40)
        qps.append((Q, V, float(np.linalg.eigvalsh(Q)[-1])))
    graphs = build_graphs(make_multiview_blobs(300, seed=0)[0], knn=10)
    return ys, qps, graphs


def run(mod, ys, qps, graphs, repeat):
    x0 = np.full(3, 1.0 / 3)
    out = {}
    out["project_simplex x2000"] = best_of(lambda: [mod.project_simplex(y) for y in ys], repeat)
    out["simplex_pgd x200"] = best_of(
        lambda: [mod.simplex_pgd(Q, V, x0, L, 1e-10, 100000) for Q, V, L in qps], repeat)
    saved = sqp.kernels
    sqp.kernels = mod
    try:
        out["solve (blobs, n=300)"] = best_of(lambda: solve(graphs, SolverConfig(mu=1.0, c=3)), repeat)
    finally:
        sqp.kernels = saved
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    ys, qps, graphs = cases(np.random.default_rng(0))
    py = run(_kernels_py, ys, qps, graphs, args.repeat)
    cy = run(_compiled, ys, qps, graphs, args.repeat) if _compiled is not None else None
    print(f"{'case':<24}{'python (s)':>12}{'compiled (s)':>14}{'speedup':>10}")
    for name, t in py.items():
        if cy is None:
            print(f"{name:<24}{t:>12.4f}{'n/a':>14}{'':>10}")
        else:
            print(f"{name:<24}{t:>12.4f}{cy[name]:>14.4f}{t / cy[name]:>9.1f}x")


if __name__ == "__main__":
    main()
