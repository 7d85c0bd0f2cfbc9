"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Prints one line per workload with both timings and the speedup, after checking
that both backends return identical results.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from iotdefense import kernels
from iotdefense.harm import PathCounter
from iotdefense.network import build_network
from iotdefense.optimizer import DeploymentProblem
from iotdefense.scenarios import pacs_case_study, scaled_network


def best_of(fn, repeat: int) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def path_workload(label, network, n_dvs, rng):
    counter = PathCounter(network)
    space = DeploymentProblem(network).valid_space()
    dvs = space if len(space) <= n_dvs else space[rng.choice(len(space), n_dvs, replace=False)]
    args = (counter.counts, counter.adj, counter.is_target, counter.is_entry, counter.patch_col, counter.order, dvs,
            counter.max_len)
    return f"count_paths {label} ({len(dvs)} dvs)", lambda backend: backend.count_paths(*args)


def rank_workload(n, rng):
    F = rng.random((n, 3)).round(2)
    return f"nondominated_ranks ({n} triples)", lambda backend: backend.nondominated_ranks(F)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if kernels.compiled_backend is None:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation` first")

    rng = np.random.default_rng(args.seed)
    workloads = [
        path_workload("pacs", build_network(pacs_case_study()), 2048, rng),
        path_workload("2-50-150", build_network(scaled_network(150)), 2000, rng),
        rank_workload(200, rng),
        rank_workload(1000, rng),
    ]
    print(f"{'workload':<40}{'python s':>12}{'compiled s':>12}{'speedup':>10}")
    for label, run in workloads:
        t_py, out_py = best_of(lambda: run(kernels.python_backend), args.repeat)
        t_c, out_c = best_of(lambda: run(kernels.compiled_backend), args.repeat)
        a = out_py if isinstance(out_py, tuple) else (out_py,)
        b = out_c if isinstance(out_c, tuple) else (out_c,)
        assert all(np.array_equal(x, y) for x, y in zip(a, b)), f"backends disagree on {label}"
        print(f"{label:<40}{t_py:>12.4f}{t_c:>12.4f}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()
