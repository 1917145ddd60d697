#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks.

Runs each hot kernel on realistic input sizes with both backends and
prints a timing table.  The active backend for the library itself is
chosen at import time via ``RATFM_DISABLE_NUMBA``; this script calls the
per-backend implementations directly so one process can compare both.
"""

import time

import numpy as np

from ratfm import _kernels


def timeit(fn, *args, repeats=30):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    if not _kernels._HAVE_NUMBA:
        print("numba not importable; nothing to compare")
        return
    rng = np.random.default_rng(0)

    scores = rng.random(20_000)
    cc = rng.normal(size=1023)
    cc_batch = rng.normal(size=(600, 1023))
    sorted_scores = np.sort(rng.random(20_000))[::-1].copy()
    soft = rng.random(20_000)
    haystack = rng.normal(size=4096)
    needle = rng.normal(size=96)

    cases = [
        ("sma_trailing (n=20k, w=96)",
         _kernels._sma_numba, _kernels._sma_numpy, (scores, 96)),
        ("best_lag (2L-1=1023)",
         _kernels._best_lag_numba, _kernels._best_lag_numpy, (cc,)),
        ("best_lag_batch (600x1023)",
         _kernels._best_lag_batch_numba, _kernels._best_lag_batch_numpy, (cc_batch,)),
        ("weighted_areas (n=20k)",
         _kernels._weighted_areas_numba, _kernels._weighted_areas_numpy,
         (sorted_scores, soft)),
        ("lag0_scan (4096/96)",
         _kernels._lag0_scan_numba, _kernels._lag0_scan_numpy, (haystack, needle)),
    ]

    # warm the JIT before timing
    for _name, numba_fn, _numpy_fn, args in cases:
        numba_fn(*args)

    print(f"{'kernel':34s} {'numba':>10s} {'numpy':>10s} {'speedup':>8s}")
    for name, numba_fn, numpy_fn, args in cases:
        t_numba = timeit(numba_fn, *args)
        t_numpy = timeit(numpy_fn, *args)
        print(f"{name:34s} {t_numba*1e3:9.3f}ms {t_numpy*1e3:9.3f}ms "
              f"{t_numpy/t_numba:7.1f}x")


if __name__ == "__main__":
    main()
