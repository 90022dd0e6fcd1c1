# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: packed-bitset marginal gains and Levenshtein DP.

Semantics must match castsel._kernels_py exactly; the test suite checks the
two backends word for word.
"""

import numpy as np

cimport numpy as cnp
from libc.stdlib cimport free, malloc

cnp.import_array()

cdef extern from *:
    """
    static inline unsigned long long _pc64(unsigned long long x) {
        return __builtin_popcountll(x);
    }
    """
    unsigned long long _pc64(unsigned long long x) nogil


def gains(cnp.uint64_t[:, ::1] rows, cnp.uint64_t[::1] mask):
    """popcount(row & ~mask) for every row; int64 output."""
    cdef Py_ssize_t n = rows.shape[0]
    cdef Py_ssize_t w = rows.shape[1]
    if mask.shape[0] != w:
        raise ValueError("mask width mismatch")
    out = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] ov = out
    cdef Py_ssize_t i, j
    cdef unsigned long long acc
    with nogil:
        for i in range(n):
            acc = 0
            for j in range(w):
                acc += _pc64(rows[i, j] & ~mask[j])
            ov[i] = <cnp.int64_t>acc
    return out


def popcount_words(cnp.uint64_t[::1] words):
    cdef Py_ssize_t j
    cdef unsigned long long acc = 0
    with nogil:
        for j in range(words.shape[0]):
            acc += _pc64(words[j])
    return int(acc)


def levenshtein(bytes a, bytes b):
    """Unit-cost edit distance over raw bytes."""
    cdef const unsigned char* pa = a
    cdef const unsigned char* pb = b
    cdef Py_ssize_t la = len(a)
    cdef Py_ssize_t lb = len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    cdef Py_ssize_t* prev = <Py_ssize_t*>malloc((lb + 1) * sizeof(Py_ssize_t))
    if prev == NULL:
        raise MemoryError()
    cdef Py_ssize_t i, j, cur, diag, tmp, best
    try:
        with nogil:
            for j in range(lb + 1):
                prev[j] = j
            for i in range(1, la + 1):
                diag = prev[0]
                prev[0] = i
                for j in range(1, lb + 1):
                    tmp = prev[j]
                    if pa[i - 1] == pb[j - 1]:
                        cur = diag
                    else:
                        cur = diag + 1
                    best = prev[j] + 1
                    if prev[j - 1] + 1 < best:
                        best = prev[j - 1] + 1
                    if cur < best:
                        best = cur
                    prev[j] = best
                    diag = tmp
            best = prev[lb]
        return best
    finally:
        free(prev)
