"""Compare the compiled and pure-Python Wilcoxon count kernels.

Run with ``python benchmarks/bench_kernels.py``. The brute-force O(n^2)
reference is timed up to ``--brute-max``.
"""

import argparse
import timeit

import numpy as np

from cpdetect import _pykernels, brute_force_process
from cpdetect.core_stats import dense_ranks

try:
    from cpdetect import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat):
    timer = timeit.Timer(fn)
    number = 1
    while timer.timeit(number) < 0.05 and number < 10_000:
        number *= 10
    return min(timer.repeat(repeat, number)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 200, 1000, 10_000, 100_000])
    ap.add_argument("--brute-max", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    print(f"{'n':>8} {'cython [ms]':>12} {'python [ms]':>12} {'brute [ms]':>12} {'py/cy':>8}")
    for n in args.sizes:
        x = rng.standard_normal(n)
        ranks, levels = dense_ranks(x)
        py = best_of(lambda: _pykernels.wilcoxon_counts(ranks, levels), args.repeat)
        cy = best_of(lambda: _ckernels.wilcoxon_counts(ranks, levels), args.repeat) if _ckernels else float("nan")
        bf = best_of(lambda: brute_force_process(x, "wilcoxon"), args.repeat) if n <= args.brute_max else float("nan")
        if _ckernels:
            assert np.array_equal(_ckernels.wilcoxon_counts(ranks, levels), _pykernels.wilcoxon_counts(ranks, levels))
        print(f"{n:>8} {cy * 1e3:>12.3f} {py * 1e3:>12.3f} {bf * 1e3:>12.3f} {py / cy:>8.1f}", flush=True)


if __name__ == "__main__":
    main()
