"""Benchmark: compiled envelope scan vs the pure-Python/numpy fallback.

Run as ``python benchmarks/bench_sandwich.py [n_max]``.  The scan is the
inner loop of the threshold search, executed ~9e6 times per certification,
so the compiled kernel dominates end-to-end pipeline time.
"""

import sys
import time

from freudcaps import kernels


def _args(n_max):
    # kappa = 4, envelope constants c- = 0.987, c+ = 1.025
    return (2, n_max, 4.0, 4.0, 0.987, 0.987, 1.025, 1.025)


def bench(fn, n_max, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*_args(n_max))
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    n_max = int(sys.argv[1]) if len(sys.argv) > 1 else 9_000_000
    t_main, r_main = bench(kernels.scan_envelope, n_max)
    t_fb, r_fb = bench(kernels.scan_envelope_fallback, n_max)
    if r_main != r_fb:
        raise SystemExit(f"result mismatch: {r_main} vs {r_fb}")
    print(f"scan to n = {n_max:,} (result {r_main})")
    print(f"  active  [{kernels.IMPLEMENTATION:>8}]: {t_main:8.3f} s "
          f"({n_max / t_main / 1e6:7.1f} Mn/s)")
    print(f"  fallback[  python]: {t_fb:8.3f} s "
          f"({n_max / t_fb / 1e6:7.1f} Mn/s)")
    print(f"  speedup: {t_fb / t_main:.2f}x")


if __name__ == "__main__":
    main()
