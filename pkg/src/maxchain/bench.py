"""Benchmark the numba kernels against the pure-numpy fallback.

Run as  python -m maxchain.bench  [--repeat N] [--scale small|large].
Each kernel is warmed once (JIT compilation) before timing; the fastest
of the repeats is reported, plus the numpy/numba ratio.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from .kernels import get_backend


def _best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _cases(scale: str):
    p_small = 1009
    if scale == "small":
        trials, n_big, exh_p = 20_000, 1 << 14, 251
    else:
        trials, n_big, exh_p = 100_000, 1 << 16, 1009
    keys_small = np.arange(64, dtype=np.uint64)
    keys_big = np.arange(n_big, dtype=np.uint64)
    p30 = 1073741827  # smallest prime >= 2**30

    def case_linear_small(impl):
        a, b = impl.sample_linear_seeds(p_small, trials, 1)
        impl.linear_maxloads(keys_small, p_small, 64, a, b)

    def case_linear_big(impl):
        a, b = impl.sample_linear_seeds(p30, 200, 2)
        impl.linear_maxloads(keys_big, p30, n_big, a, b)

    def case_ms(impl):
        a = impl.sample_ms_seeds(30, 200, 3)
        impl.ms_maxloads(keys_big, 30, n_big.bit_length() - 1, a)

    def case_random(impl):
        impl.random_maxloads(4096, 4096, 500, 4)

    def case_exhaustive(impl):
        impl.linear_exhaustive_hist(keys_small, exh_p, 64)

    return [
        (f"linear trials T={trials} n=64 p={p_small}", case_linear_small),
        (f"linear trials T=200 n={n_big} p=2^30", case_linear_big),
        (f"multiply-shift T=200 n={n_big}", case_ms),
        ("fully-random T=500 n=m=4096", case_random),
        (f"exhaustive seeds p={exh_p} n=64", case_exhaustive),
    ]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="python -m maxchain.bench")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--scale", choices=["small", "large"], default="small")
    args = ap.parse_args(argv)

    backends = {}
    for name in ("numba", "numpy"):
        try:
            backends[name] = get_backend(name)
        except ImportError:
            print(f"backend {name} unavailable, skipping")
    if not backends:
        return 1

    cases = _cases(args.scale)
    # warm-up pass (numba compiles here, not on the clock)
    for _, fn in cases:
        for impl in backends.values():
            fn(impl)

    width = max(len(label) for label, _ in cases)
    header = f"{'kernel'.ljust(width)}  " + "  ".join(f"{n:>10}" for n in backends)
    if len(backends) == 2:
        header += f"  {'np/nb':>7}"
    print(header)
    for label, fn in cases:
        times = {n: _best_of(lambda impl=impl: fn(impl), args.repeat) for n, impl in backends.items()}
        row = f"{label.ljust(width)}  " + "  ".join(f"{times[n]*1e3:9.1f}ms" for n in times)
        if len(times) == 2:
            row += f"  {times['numpy'] / times['numba']:6.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
