"""Pure-Python / numpy fallback for the compiled kernels.

Must be semantically identical to castsel._kernels; parity is enforced by
tests/test_kernels.py.
"""

from __future__ import annotations

import numpy as np


def gains(rows: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """popcount(row & ~mask) for every row; int64 output."""
    if mask.shape[0] != rows.shape[1]:
        raise ValueError("mask width mismatch")
    return np.bitwise_count(rows & ~mask).sum(axis=1, dtype=np.int64)


def popcount_words(words: np.ndarray) -> int:
    return int(np.bitwise_count(words).sum())


def levenshtein(a: bytes, b: bytes) -> int:
    """Unit-cost edit distance over raw bytes; vectorized row DP.

    Within a row, cur[j] = min over i <= j of cand[i] + (j - i) where cand
    holds the delete/substitute candidates, so the sequential insertion
    dependency collapses to a running minimum of cand[i] - i.
    """
    if not a:
        return len(b)
    if not b:
        return len(a)
    bv = np.frombuffer(b, dtype=np.uint8)
    idx = np.arange(len(b) + 1, dtype=np.int64)
    prev = idx.copy()
    cand = np.empty(len(b) + 1, dtype=np.int64)
    for i, ca in enumerate(a, 1):
        cand[0] = i
        np.minimum(prev[1:] + 1, prev[:-1] + (bv != ca), out=cand[1:])
        prev = np.minimum.accumulate(cand - idx) + idx
    return int(prev[-1])
