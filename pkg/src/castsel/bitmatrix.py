"""Packed binary co-occurrence matrix.

One row per candidate exemplar, one column per node of the test tree
(post-order index, so duplicate fingerprints yield duplicate columns).
Rows are packed into 64-bit words; column j lives at word j//64, bit j%64.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

__all__ = ["CoMatrix", "words_for"]


def words_for(columns: int) -> int:
    return (columns + 63) // 64


@dataclass(frozen=True)
class CoMatrix:
    """Binary matrix M: M[i][j]=1 iff test node j's fingerprint occurs in
    candidate i's fingerprint set."""

    rows: np.ndarray  # (n_rows, n_words) uint64, packed little-endian bitwise
    column_count: int
    candidate_ids: tuple[int, ...]  # row -> database position

    def __post_init__(self):
        if self.rows.ndim != 2 or self.rows.dtype != np.uint64:
            raise ValueError("rows must be a 2-D uint64 array")
        if self.rows.shape[0] != len(self.candidate_ids):
            raise ValueError("row / candidate_ids length mismatch")
        if self.rows.shape[1] != words_for(self.column_count):
            raise ValueError("word width inconsistent with column count")

    @property
    def row_count(self) -> int:
        return self.rows.shape[0]

    @property
    def word_count(self) -> int:
        return self.rows.shape[1]

    def get(self, i: int, j: int) -> int:
        """Bit value M[i][j]."""
        if not (0 <= i < self.row_count and 0 <= j < self.column_count):
            raise IndexError("matrix index out of range")
        return int(self.rows[i, j // 64] >> np.uint64(j % 64)) & 1

    def row_bits(self, i: int) -> list[int]:
        return [self.get(i, j) for j in range(self.column_count)]

    def empty_mask(self) -> np.ndarray:
        return np.zeros(self.word_count, dtype=np.uint64)

    def row_popcount(self, i: int) -> int:
        return kernels.popcount_words(np.ascontiguousarray(self.rows[i]))


def pack_bits(bits: list[int], column_count: int | None = None) -> np.ndarray:
    """Pack a 0/1 list into a uint64 word array (test/debug helper)."""
    if column_count is None:
        column_count = len(bits)
    words = np.zeros(words_for(column_count), dtype=np.uint64)
    for j, b in enumerate(bits):
        if b:
            words[j // 64] |= np.uint64(1) << np.uint64(j % 64)
    return words
