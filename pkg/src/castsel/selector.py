"""Coverage objective, greedy submodular maximization, and the two
selection pipelines (fixed-k and threshold-adaptive).

The objective over a packed binary matrix M is f(S) = popcount(OR of the
rows in S); its marginal gain for row i against a coverage mask c is
popcount(M[i] AND NOT c). Greedy picks the best gain each step, which
carries the (1 - (1-1/k)^k) >= (1 - 1/e) approximation guarantee for
monotone submodular objectives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import kernels
from .bitmatrix import CoMatrix
from .fingerprint import fingerprint_tree
from .index import ExemplarDatabase, build_cooccurrence
from .tree import ParserAdapter

__all__ = [
    "SelectionError",
    "SelectionConfig",
    "SelectionResult",
    "coverage_value",
    "marginal_gain",
    "greedy_select",
    "exhaustive_optimal",
    "cast_ratio",
    "prerecall_ld",
    "select_cast_f",
    "select_cast_a",
]


class SelectionError(ValueError):
    pass


@dataclass(frozen=True)
class SelectionConfig:
    """Knobs for the selection pipelines.

    ``t`` scales the lexical pre-recall pool to floor(t*k) candidates
    (t=2 is the default sweet spot). ``tau``/``k_max`` only apply to the
    adaptive pipeline.
    """

    k: int = 5
    t: float = 2.0
    tau: float = 0.98
    k_max: int = 20
    tie_break: str = "prerecall_rank"
    prompt_order: str = "selection"

    def __post_init__(self):
        if self.k <= 0:
            raise SelectionError("k must be positive")
        if self.t < 1.0:
            raise SelectionError("pre-recall factor t must be >= 1")
        if not 0.0 < self.tau <= 1.0:
            raise SelectionError("tau must lie in (0, 1]")
        if self.k_max <= 0:
            raise SelectionError("k_max must be positive")


@dataclass(frozen=True)
class SelectionResult:
    selected: tuple[int, ...]          # database positions, selection order
    gains: tuple[int, ...]             # covered-column count added per step
    cast_after: tuple[float, ...]      # running coverage ratio per step
    filled_by_fallback: int            # slots filled after gains hit zero
    coverage_mask: np.ndarray = field(compare=False)
    column_count: int = 0
    shortfall: int = 0                 # requested k minus available rows
    tau_reached: bool | None = None    # adaptive pipeline only

    @property
    def final_cast(self) -> float:
        return self.cast_after[-1] if self.cast_after else 0.0


def coverage_value(matrix: CoMatrix, selected) -> int:
    """f(S): number of columns covered by the union of the given rows."""
    mask = matrix.empty_mask()
    for i in selected:
        if not 0 <= i < matrix.row_count:
            raise SelectionError(f"row index {i} out of range")
        mask |= matrix.rows[i]
    return kernels.popcount_words(mask)


def marginal_gain(matrix: CoMatrix, mask: np.ndarray, i: int) -> int:
    """popcount(M[i] AND NOT mask): columns row i would newly cover."""
    if mask.shape[0] != matrix.word_count:
        raise SelectionError("mask width mismatch")
    if not 0 <= i < matrix.row_count:
        raise SelectionError(f"row index {i} out of range")
    row = np.ascontiguousarray(matrix.rows[i:i + 1])
    return int(kernels.gains(row, np.ascontiguousarray(mask))[0])


def cast_ratio(mask: np.ndarray, column_count: int) -> float:
    """Fraction of test-tree nodes whose subtrees are covered."""
    if column_count < 1:
        raise SelectionError("column_count must be >= 1")
    return kernels.popcount_words(np.ascontiguousarray(mask)) / column_count


def greedy_select(
    matrix: CoMatrix,
    k: int,
    *,
    stop_tau: float | None = None,
    fill_to_k: bool = True,
) -> SelectionResult:
    """Greedy maximization of covered columns.

    Rows are assumed to be in pre-recall rank order, so the tie-break
    (best rank, then lowest database position) reduces to "first row with
    the maximal gain". With ``fill_to_k`` the result is padded to k rows in
    rank order once gains reach zero; with ``stop_tau`` selection stops as
    soon as the running coverage ratio reaches the threshold or the next
    best gain is zero (no padding).
    """
    if k <= 0:
        raise SelectionError("k must be positive")
    n = matrix.row_count
    shortfall = max(0, k - n)
    k_eff = min(k, n)

    mask = matrix.empty_mask()
    selected_rows: list[int] = []
    gains: list[int] = []
    cast_after: list[float] = []
    covered = 0
    taken = np.zeros(n, dtype=bool)
    filled = 0
    tau_reached = None if stop_tau is None else False

    while len(selected_rows) < k_eff:
        g = kernels.gains(matrix.rows, np.ascontiguousarray(mask))
        g[taken] = -1
        best = int(np.argmax(g))
        best_gain = int(g[best])
        if best_gain <= 0:
            break
        selected_rows.append(best)
        taken[best] = True
        mask |= matrix.rows[best]
        covered += best_gain
        gains.append(best_gain)
        cast_after.append(covered / matrix.column_count)
        if stop_tau is not None and cast_after[-1] >= stop_tau:
            tau_reached = True
            break

    if stop_tau is None and fill_to_k:
        for row in range(n):
            if len(selected_rows) >= k_eff:
                break
            if not taken[row]:
                selected_rows.append(row)
                taken[row] = True
                gains.append(0)
                cast_after.append(covered / matrix.column_count)
                filled += 1

    selected = tuple(matrix.candidate_ids[r] for r in selected_rows)
    return SelectionResult(
        selected=selected,
        gains=tuple(gains),
        cast_after=tuple(cast_after),
        filled_by_fallback=filled,
        coverage_mask=mask,
        column_count=matrix.column_count,
        shortfall=shortfall,
        tau_reached=tau_reached,
    )


def exhaustive_optimal(matrix: CoMatrix, k: int) -> tuple[int, tuple[int, ...]]:
    """True optimum by enumeration; oracle for the greedy bound.

    Witness is the lexicographically smallest optimal row subset. Guarded
    to C(n, k) <= 10^6 instances.
    """
    n = matrix.row_count
    k = min(k, n)
    if k <= 0:
        raise SelectionError("k must be positive")
    if math.comb(n, k) > 10**6:
        raise SelectionError("instance too large for exhaustive enumeration")
    best_value = -1
    best_subset: tuple[int, ...] = ()
    for subset in combinations(range(n), k):
        mask = matrix.empty_mask()
        for i in subset:
            mask |= matrix.rows[i]
        value = kernels.popcount_words(mask)
        if value > best_value:
            best_value = value
            best_subset = subset
    return best_value, best_subset


def prerecall_ld(db: ExemplarDatabase, query_source: str, m: int) -> list[int]:
    """The m database positions lexically nearest to the query.

    Distance is byte-level Levenshtein on the raw source texts, ascending,
    ties broken by ascending position.
    """
    if m < 1:
        raise SelectionError("m must be >= 1")
    q = query_source.encode("utf-8")
    scored = [
        (kernels.levenshtein(q, rec.source_text.encode("utf-8")), pos)
        for pos, rec in enumerate(db.records)
    ]
    scored.sort()
    return [pos for _, pos in scored[:m]]


def _prepare(db, query_source, query_lang, adapter, pool_size, query_tree=None,
             prerecall_order=None):
    if not db.records:
        raise SelectionError("database is empty")
    tree = query_tree if query_tree is not None else adapter.parse(query_source, query_lang)
    profile = fingerprint_tree(tree)
    if prerecall_order is not None:
        candidates = list(prerecall_order[:max(1, pool_size)])
    else:
        candidates = prerecall_ld(db, query_source, max(1, pool_size))
    matrix = build_cooccurrence(db, candidates, profile)
    return matrix


def select_cast_f(
    db: ExemplarDatabase,
    query_source: str,
    query_lang: str,
    cfg: SelectionConfig,
    adapter: ParserAdapter,
    query_tree=None,
    prerecall_order=None,
) -> SelectionResult:
    """Fixed-k pipeline: parse, fingerprint, pre-recall floor(t*k) by
    Levenshtein, build the co-occurrence matrix, greedy-select k.

    A pre-parsed ``query_tree`` bypasses the adapter; Levenshtein pre-recall
    always runs on the raw source text. A precomputed ``prerecall_order``
    (full LD ranking of the database) skips the distance pass; callers that
    sweep several shot counts reuse one ranking.
    """
    matrix = _prepare(db, query_source, query_lang, adapter, int(cfg.t * cfg.k),
                      query_tree, prerecall_order)
    return greedy_select(matrix, cfg.k)


def select_cast_a(
    db: ExemplarDatabase,
    query_source: str,
    query_lang: str,
    cfg: SelectionConfig,
    adapter: ParserAdapter,
    query_tree=None,
    prerecall_order=None,
) -> SelectionResult:
    """Adaptive pipeline: greedy over floor(t*k_max) pre-recalled candidates,
    stopping once coverage reaches tau, the gain hits zero, or k_max picks."""
    matrix = _prepare(db, query_source, query_lang, adapter, int(cfg.t * cfg.k_max),
                      query_tree, prerecall_order)
    return greedy_select(matrix, cfg.k_max, stop_tau=cfg.tau, fill_to_k=False)
