#!/usr/bin/env python3
"""Benchmark the numba-compiled kernel sums against the pure-numpy fallback.

Run:  python benchmarks/bench_backends.py [--repeats 5]

The numba path is what `mmdmiss` uses by default; MMDMISS_PURE_NUMPY=1
selects the numpy path at import time. This script imports both
implementations directly so a single run compares them side by side.
"""

import argparse
import time

import numpy as np

from mmdmiss import _backend

SIZES = [
    ("self-gram  S=50   d=10", "self", (50, 10)),
    ("self-gram  S=200  d=10", "self", (200, 10)),
    ("cross-sums n=500  S=50 d=10", "cross", (500, 50, 10)),
    ("cross-sums n=10000 S=50 d=1", "cross", (10_000, 50, 1)),
    ("cross-sums n=100000 S=50 d=1", "cross", (100_000, 50, 1)),
    ("gram-total n=4000 d=2", "gram", (4000, 2)),
    ("pair-overlap n=500 d=10", "pairs", (500, 10)),
]


def _build(kind, shape, rng):
    if kind == "self":
        S, d = shape
        return (rng.standard_normal((S, d)), 2.0)
    if kind == "cross":
        n, S, d = shape
        return (rng.standard_normal((n, d)), rng.standard_normal((S, d)), 2.0)
    if kind == "gram":
        n, d = shape
        return (rng.standard_normal((n, d)), 2.0)
    n, d = shape
    values = rng.standard_normal((n, d))
    mask = rng.random((n, d)) < 0.3
    mask[mask.all(axis=1)] = False
    return (np.where(mask, 0.0, values), (~mask).astype(float), float(d))


FUNCS = {
    "self": (_backend.self_gram_row_sums, _backend.self_gram_row_sums_np),
    "cross": (_backend.cross_col_sums, _backend.cross_col_sums_np),
    "gram": (_backend.gram_total_sym, _backend.gram_total_sym_np),
    "pairs": (_backend.pair_overlap_scaled, _backend.pair_overlap_scaled_np),
}


def _time(fn, args, repeats):
    fn(*args)  # warm up (JIT compile on the numba path)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if _backend.BACKEND != "numba":
        print(
            "note: numba backend inactive "
            "(MMDMISS_PURE_NUMPY set or numba missing); "
            "the 'accelerated' column below equals the numpy fallback"
        )
    rng = np.random.default_rng(0)
    header = f"{'case':32s} {'numba':>10s} {'numpy':>10s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))
    for label, kind, shape in SIZES:
        fast_fn, np_fn = FUNCS[kind]
        data = _build(kind, shape, rng)
        t_fast = _time(fast_fn, data, args.repeats)
        t_np = _time(np_fn, data, args.repeats)
        print(
            f"{label:32s} {t_fast*1e3:9.2f}ms {t_np*1e3:9.2f}ms "
            f"{t_np / t_fast:7.1f}x"
        )


if __name__ == "__main__":
    main()
