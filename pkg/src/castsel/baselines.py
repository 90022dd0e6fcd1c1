"""Reference exemplar-selection strategies for head-to-head comparisons.

All selectors return distinct 0-based database positions, size min(k, n),
deterministic for a given seed. Embeddings are always ingested from a file
(see EmbeddingTable); no neural model is ever loaded here.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from . import kernels
from .index import ExemplarDatabase
from .tree import TypedTree, parse_sexpr

__all__ = [
    "BaselineError",
    "EmbeddingTable",
    "load_embeddings",
    "levenshtein",
    "zhang_shasha",
    "select_random",
    "select_fixed",
    "select_ld",
    "select_bm25",
    "select_ast_ed",
    "select_embed_topk",
    "select_diversity",
]

BM25_K1 = 1.2
BM25_B = 0.75

_TOKEN_RE = re.compile(r"[a-z0-9_]+")


class BaselineError(ValueError):
    pass


def levenshtein(a: str, b: str) -> int:
    """Byte-level edit distance, case-sensitive, no normalization."""
    return kernels.levenshtein(a.encode("utf-8"), b.encode("utf-8"))


# ---------------------------------------------------------------------------
# embeddings

@dataclass(frozen=True)
class EmbeddingTable:
    """Externally computed vectors, one per exemplar id.

    After align() the row index equals the database position, which is what
    the embedding-based selectors operate on.
    """

    ids: tuple[str, ...]
    vectors: np.ndarray  # (n, d) float64

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    def align(self, db: ExemplarDatabase) -> "EmbeddingTable":
        """Reorder rows into database-position order; every record needs a vector."""
        by_id = {eid: i for i, eid in enumerate(self.ids)}
        rows = []
        for rec in db.records:
            if rec.id not in by_id:
                raise BaselineError(f"no embedding for exemplar id {rec.id!r}")
            rows.append(self.vectors[by_id[rec.id]])
        return EmbeddingTable(tuple(r.id for r in db.records), np.array(rows))


def load_embeddings(path) -> EmbeddingTable:
    """Parse the embedding file: header ``dim d``, then ``id v1 ... vd``."""
    ids: list[str] = []
    rows: list[list[float]] = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2 or header[0] != "dim":
            raise BaselineError("embedding file must start with 'dim d'")
        d = int(header[1])
        for lineno, line in enumerate(fh, 2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != d + 1:
                raise BaselineError(f"line {lineno}: expected {d} values")
            ids.append(parts[0])
            rows.append([float(x) for x in parts[1:]])
    return EmbeddingTable(tuple(ids), np.array(rows, dtype=np.float64))


def _cosines(vectors: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Cosine to the query per row; zero-norm rows get -inf so they rank last."""
    if vectors.shape[1] != query.shape[0]:
        raise BaselineError("embedding dimension mismatch")
    norms = np.linalg.norm(vectors, axis=1)
    qn = np.linalg.norm(query)
    out = np.full(len(vectors), -np.inf)
    ok = norms > 0
    if qn > 0:
        out[ok] = vectors[ok] @ query / (norms[ok] * qn)
    else:
        out[ok] = 0.0
    return out


# ---------------------------------------------------------------------------
# selectors

def select_random(db: ExemplarDatabase, k: int, seed: int) -> list[int]:
    """k distinct positions, uniform without replacement, seeded."""
    n = len(db)
    if k > n:
        raise BaselineError(f"k={k} exceeds corpus size {n}")
    import random

    return random.Random(seed).sample(range(n), k)


def select_fixed(db: ExemplarDatabase, ids) -> list[int]:
    """The same static positions for every query."""
    by_id = {rec.id: pos for pos, rec in enumerate(db.records)}
    out = []
    for eid in ids:
        if eid not in by_id:
            raise BaselineError(f"unknown exemplar id {eid!r}")
        out.append(by_id[eid])
    return out


def select_ld(db: ExemplarDatabase, query_source: str, k: int) -> list[int]:
    """Top-k smallest Levenshtein distance, ties by position."""
    n = len(db)
    if k > n:
        raise BaselineError(f"k={k} exceeds corpus size {n}")
    q = query_source.encode("utf-8")
    scored = sorted(
        (kernels.levenshtein(q, rec.source_text.encode("utf-8")), pos)
        for pos, rec in enumerate(db.records)
    )
    return [pos for _, pos in scored[:k]]


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def bm25_scores(db: ExemplarDatabase, query_source: str) -> list[float]:
    """Okapi BM25 (k1=1.2, b=0.75) over lowercased alphanumeric/underscore
    tokens; each distinct query token contributes once.

    idf(t) = ln((n - df + 0.5) / (df + 0.5) + 1).
    """
    query_tokens = set(tokenize(query_source))
    if not query_tokens:
        raise BaselineError("query tokenizes to nothing")
    docs = [tokenize(rec.source_text) for rec in db.records]
    n = len(docs)
    avgdl = sum(len(d) for d in docs) / n if n else 0.0
    df: dict[str, int] = {}
    for d in docs:
        for t in set(d):
            df[t] = df.get(t, 0) + 1
    scores = []
    for d in docs:
        dl = len(d)
        tf = {}
        for t in d:
            tf[t] = tf.get(t, 0) + 1
        s = 0.0
        for t in query_tokens:
            f = tf.get(t, 0)
            if f == 0:
                continue
            idf = math.log((n - df[t] + 0.5) / (df[t] + 0.5) + 1.0)
            s += idf * f * (BM25_K1 + 1) / (f + BM25_K1 * (1 - BM25_B + BM25_B * dl / avgdl))
        scores.append(s)
    return scores


def select_bm25(db: ExemplarDatabase, query_source: str, k: int) -> list[int]:
    """Top-k by BM25 relevance, ties by position."""
    n = len(db)
    if k > n:
        raise BaselineError(f"k={k} exceeds corpus size {n}")
    scores = bm25_scores(db, query_source)
    order = sorted(range(n), key=lambda p: (-scores[p], p))
    return order[:k]


# ---------------------------------------------------------------------------
# tree edit distance (Zhang & Shasha, ordered trees, unit costs)

def _ted_arrays(tree: TypedTree):
    """Post-order labels, leftmost-leaf indices, and keyroots."""
    order = tree.postorder()
    pos_of = {node: i for i, node in enumerate(order)}
    labels = [tree.types[node] for node in order]
    lml = [0] * len(order)
    for i, node in enumerate(order):
        cur = node
        while tree.children[cur]:
            cur = tree.children[cur][0]
        lml[i] = pos_of[cur]
    keyroots = sorted({max(i for i in range(len(order)) if lml[i] == l) for l in set(lml)})
    return labels, lml, keyroots


def zhang_shasha(t1: TypedTree, t2: TypedTree) -> int:
    """Ordered tree edit distance: insert/delete cost 1, relabel cost 1
    (0 on equal types)."""
    l1, lml1, kr1 = _ted_arrays(t1)
    l2, lml2, kr2 = _ted_arrays(t2)
    n1, n2 = len(l1), len(l2)
    td = [[0] * n2 for _ in range(n1)]

    for i in kr1:
        for j in kr2:
            li, lj = lml1[i], lml2[j]
            w1, w2 = i - li + 2, j - lj + 2
            fd = [[0] * w2 for _ in range(w1)]
            for x in range(1, w1):
                fd[x][0] = fd[x - 1][0] + 1
            for y in range(1, w2):
                fd[0][y] = fd[0][y - 1] + 1
            for x in range(1, w1):
                for y in range(1, w2):
                    a, b = li + x - 1, lj + y - 1
                    if lml1[a] == li and lml2[b] == lj:
                        cost = 0 if l1[a] == l2[b] else 1
                        fd[x][y] = min(
                            fd[x - 1][y] + 1,
                            fd[x][y - 1] + 1,
                            fd[x - 1][y - 1] + cost,
                        )
                        td[a][b] = fd[x][y]
                    else:
                        fd[x][y] = min(
                            fd[x - 1][y] + 1,
                            fd[x][y - 1] + 1,
                            fd[lml1[a] - li][lml2[b] - lj] + td[a][b],
                        )
    return td[n1 - 1][n2 - 1]


def select_ast_ed(db: ExemplarDatabase, query_tree: TypedTree, k: int) -> list[int]:
    """Top-k smallest type-only tree edit distance, ties by position."""
    n = len(db)
    if k > n:
        raise BaselineError(f"k={k} exceeds corpus size {n}")
    scored = sorted(
        (zhang_shasha(query_tree, parse_sexpr(rec.tree_sexpr)), pos)
        for pos, rec in enumerate(db.records)
    )
    return [pos for _, pos in scored[:k]]


# ---------------------------------------------------------------------------
# embedding similarity and diversity clustering

def select_embed_topk(table: EmbeddingTable, query_vec, k: int) -> list[int]:
    """Top-k rows of an aligned table by cosine similarity, ties by position."""
    query = np.asarray(query_vec, dtype=np.float64)
    cos = _cosines(table.vectors, query)
    n = len(cos)
    if k > n:
        raise BaselineError(f"k={k} exceeds table size {n}")
    order = sorted(range(n), key=lambda p: (-cos[p], p))
    return order[:k]


def _kmeans(vectors: np.ndarray, k: int, seed: int, max_iter: int = 100,
            tol: float = 1e-9) -> np.ndarray:
    """Lloyd's algorithm with k-means++ init; returns cluster labels."""
    rng = np.random.default_rng(seed)
    n = len(vectors)
    centers = np.empty((k, vectors.shape[1]))
    centers[0] = vectors[rng.integers(n)]
    d2 = np.sum((vectors - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers[c] = vectors[rng.integers(n)]
        else:
            centers[c] = vectors[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((vectors - centers[c]) ** 2, axis=1))
    labels = np.zeros(n, dtype=int)
    for _ in range(max_iter):
        dists = ((vectors[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = dists.argmin(axis=1)
        shift = 0.0
        for c in range(k):
            members = vectors[labels == c]
            if len(members):
                new_center = members.mean(axis=0)
                shift = max(shift, float(np.sum((new_center - centers[c]) ** 2)))
                centers[c] = new_center
        if shift < tol:
            break
    return labels

def select_diversity(table: EmbeddingTable, query_vec, k: int, seed: int) -> list[int]:
    """Cluster the pool into k groups, then take each cluster's member most
    similar to the query; empty clusters backfill from the best remaining
    global cosine."""
    n = len(table.vectors)
    if n < k:
        raise BaselineError(f"corpus size {n} below k={k}")
    query = np.asarray(query_vec, dtype=np.float64)
    cos = _cosines(table.vectors, query)
    labels = _kmeans(table.vectors, k, seed)
    picked: list[int] = []
    chosen = set()
    for c in range(k):
        members = [p for p in range(n) if labels[p] == c]
        if not members:
            continue
        best = min(members, key=lambda p: (-cos[p], p))
        picked.append(best)
        chosen.add(best)
    remaining = sorted((p for p in range(n) if p not in chosen),
                       key=lambda p: (-cos[p], p))
    while len(picked) < k:
        picked.append(remaining.pop(0))
    return picked
