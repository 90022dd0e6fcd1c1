"""Compare the compiled kernel backend against the pure-Python fallback.

Times the two hot paths: the per-step gain vector used by the greedy
selector, and byte-level Levenshtein used by the lexical pre-recall.

Usage: python benchmarks/bench_kernels.py [--rows N] [--cols N] [--repeat N]
"""

import argparse
import random
import time

import numpy as np

from castsel.kernels import get_backends


def bench_gains(module, rows, mask, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        module.gains(rows, mask)
        best = min(best, time.perf_counter() - start)
    return best


def bench_levenshtein(module, pairs, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        for a, b in pairs:
            module.levenshtein(a, b)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=10_000)
    parser.add_argument("--cols", type=int, default=2_048)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--pairs", type=int, default=200,
                        help="number of Levenshtein string pairs")
    parser.add_argument("--strlen", type=int, default=300)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    words = args.cols // 64
    rows = rng.integers(0, 2**64, size=(args.rows, words), dtype=np.uint64)
    mask = rng.integers(0, 2**64, size=words, dtype=np.uint64)

    pyrng = random.Random(0)
    pairs = [
        (bytes(pyrng.randrange(97, 123) for _ in range(args.strlen)),
         bytes(pyrng.randrange(97, 123) for _ in range(args.strlen)))
        for _ in range(args.pairs)
    ]

    backends = get_backends()
    print(f"gains: {args.rows} rows x {args.cols} bits, best of {args.repeat}")
    times = {}
    for name, module in backends:
        t = bench_gains(module, rows, mask, args.repeat)
        times[name] = t
        print(f"  {name:10s} {t * 1e3:9.2f} ms")
    if len(times) == 2:
        print(f"  speedup    {times['python'] / times['compiled']:.2f}x")

    print(f"levenshtein: {args.pairs} pairs of {args.strlen}-byte strings")
    times = {}
    for name, module in backends:
        t = bench_levenshtein(module, pairs, args.repeat)
        times[name] = t
        print(f"  {name:10s} {t * 1e3:9.2f} ms")
    if len(times) == 2:
        print(f"  speedup    {times['python'] / times['compiled']:.2f}x")


if __name__ == "__main__":
    main()
