"""Compare the compiled and pure-Python scheduling kernels.

    python benchmarks/bench_sched.py [--sizes 1000 10000 100000] [--workers 16] [--repeat 3]

Each case is a random layered DAG with per-edge delays, a mix of decode
jobs and zero-duration milestones, and a fixed pool of workers. Both
kernels must produce identical schedules; the script exits non-zero if not.
"""
from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from ftqc_reaction.sim import sched


def random_dag(n: int, seed: int = 0, max_deps: int = 3):
    rng = np.random.default_rng(seed)
    release = rng.integers(0, 10 * n, n, dtype=np.int64)
    duration = rng.integers(1, 5_000, n, dtype=np.int64)
    uses = (rng.random(n) < 0.8).astype(np.int64)
    counts = np.where(np.arange(n) == 0, 0, rng.integers(0, max_deps + 1, n))
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=ptr[1:])
    idx = np.empty(ptr[-1], dtype=np.int64)
    for j in range(1, n):
        k = counts[j]
        if k:
            lo = max(0, j - 64)
            idx[ptr[j]:ptr[j + 1]] = rng.integers(lo, j, k)
    delay = rng.integers(0, 2_000, ptr[-1], dtype=np.int64)
    return release, duration, uses, ptr, idx, delay


def best_of(fn, args, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1_000, 10_000, 100_000])
    ap.add_argument("--workers", type=int, default=16)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if sched.compiled_schedule_dag is None:
        print("compiled kernel not built; reinstall without FTQC_REACTION_NO_EXT", file=sys.stderr)
        return 1
    print(f"{'jobs':>8} {'python_s':>10} {'compiled_s':>11} {'speedup':>8}  identical")
    ok = True
    for n in args.sizes:
        dag = random_dag(n)
        tp, rp = best_of(sched.python_schedule_dag, (*dag, args.workers), args.repeat)
        tc, rc = best_of(sched.compiled_schedule_dag, (*dag, args.workers), args.repeat)
        same = all(np.array_equal(a, b) for a, b in zip(rp, rc))
        ok &= same
        print(f"{n:>8} {tp:>10.4f} {tc:>11.4f} {tp / tc:>7.1f}x  {same}")
    return 0 if ok else 2


if __name__ == "__main__":
    sys.exit(main())
