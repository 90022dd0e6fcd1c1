import functools
import math
import random

import numpy as np
import pytest

from castsel.baselines import (
    BaselineError,
    EmbeddingTable,
    bm25_scores,
    levenshtein,
    load_embeddings,
    select_ast_ed,
    select_bm25,
    select_diversity,
    select_embed_topk,
    select_fixed,
    select_ld,
    select_random,
    zhang_shasha,
)
from castsel.harness import CorpusEntry
from castsel.index import build_database
from castsel.selector import prerecall_ld
from castsel.tree import SexprAdapter, parse_sexpr, to_sexpr
from conftest import random_tree

ADAPTER = SexprAdapter()


def make_db(sources):
    entries = [
        CorpusEntry(id=f"e{i}", source_lang="sexpr", target_lang="sexpr",
                    source=s, target=s)
        for i, s in enumerate(sources)
    ]
    db, _ = build_database(entries, ADAPTER)
    return db


def make_text_db(texts):
    # arbitrary valid trees; only source_text matters for lexical selectors
    entries = [
        CorpusEntry(id=f"e{i}", source_lang="x", target_lang="y",
                    source=s, target="", tree=f"(T{i})")
        for i, s in enumerate(texts)
    ]
    db, _ = build_database(entries, adapter=None)
    return db


class TestRandom:
    def test_permutation_at_k_equals_n(self):
        db = make_db(["(A)", "(B)", "(C)"])
        assert sorted(select_random(db, 3, seed=1)) == [0, 1, 2]

    def test_seed_reproducible(self):
        db = make_db([f"(T{i})" for i in range(10)])
        assert select_random(db, 4, seed=42) == select_random(db, 4, seed=42)

    def test_k_too_large(self):
        db = make_db(["(A)"])
        with pytest.raises(BaselineError):
            select_random(db, 2, seed=0)

    def test_uniformity_chi_square(self):
        db = make_db([f"(T{i})" for i in range(8)])
        n, k, draws = 8, 2, 10_000
        counts = [0] * n
        for s in range(draws):
            for p in select_random(db, k, seed=s):
                counts[p] += 1
        expected = draws * k / n
        chi2 = sum((c - expected) ** 2 / expected for c in counts)
        dof = n - 1
        assert chi2 < dof + 3 * math.sqrt(2 * dof)


class TestFixed:
    def test_single_id(self):
        db = make_db(["(A)", "(B)"])
        assert select_fixed(db, ["e1"]) == [1]

    def test_query_independent(self):
        db = make_db(["(A)", "(B)", "(C)"])
        assert select_fixed(db, ["e2", "e0"]) == select_fixed(db, ["e2", "e0"]) == [2, 0]

    def test_unknown_id(self):
        db = make_db(["(A)"])
        with pytest.raises(BaselineError):
            select_fixed(db, ["nope"])


class TestLD:
    def test_duplicate_first(self):
        db = make_text_db(["x = 1", "while a: b", "for i in r: s"])
        assert select_ld(db, "x = 1", 1) == [0]

    def test_full_ordering_matches_oracle(self):
        from test_kernels import reference_levenshtein

        texts = ["abcdef", "abXdef", "zzzzzz", "abcd"]
        db = make_text_db(texts)
        q = "abcdef"
        expected = sorted(range(4), key=lambda p: (reference_levenshtein(
            q.encode(), texts[p].encode()), p))
        assert select_ld(db, q, 4) == expected

    def test_agrees_with_prerecall(self):
        texts = ["foo bar", "foo baz", "qux quux", "foo"]
        db = make_text_db(texts)
        assert select_ld(db, "foo bat", 4) == prerecall_ld(db, "foo bat", 4)


class TestBM25:
    # 3-doc corpus, query "add mul"; scores hand-evaluated from the stated
    # formula (k1=1.2, b=0.75, idf=ln((n-df+0.5)/(df+0.5)+1)) and frozen.
    DOCS = ["add add mul", "mul div", "add sub"]
    FROZEN = [1.0190036401511668, 0.4991762683023676, 0.4991762683023676]

    def test_scores_match_frozen_table(self):
        db = make_text_db(self.DOCS)
        scores = bm25_scores(db, "add mul")
        assert scores == pytest.approx(self.FROZEN, abs=1e-12)

    def test_top1_matches_score_table(self):
        db = make_text_db(self.DOCS)
        assert select_bm25(db, "add mul", 1) == [self.FROZEN.index(max(self.FROZEN))]

    def test_ubiquitous_token_idf(self):
        # token in every document: idf = ln((n - n + 0.5)/(n + 0.5) + 1)
        db = make_text_db(["common a", "common b", "common c"])
        scores = bm25_scores(db, "common")
        idf = math.log(0.5 / 3.5 + 1)
        for pos, s in enumerate(scores):
            dl = 2
            avgdl = 2
            expected = idf * 1 * 2.2 / (1 + 1.2 * (0.25 + 0.75 * dl / avgdl))
            assert s == pytest.approx(expected)

    def test_duplicate_ranked_first(self):
        db = make_text_db(["alpha beta gamma", "delta", "epsilon zeta"])
        assert select_bm25(db, "alpha beta gamma", 1) == [0]

    def test_empty_query_rejected(self):
        db = make_text_db(["a"])
        with pytest.raises(BaselineError):
            select_bm25(db, "!!!", 1)


def tree_size(node):
    return 1 + sum(tree_size(c) for c in node[1:])


def brute_force_ted(t1, t2):
    """Exponential forest edit distance over (type, children...) tuples;
    independent of the Zhang-Shasha DP."""

    @functools.lru_cache(maxsize=None)
    def fdist(f1, f2):
        if not f1 and not f2:
            return 0
        if not f1:
            return sum(tree_size(t) for t in f2)
        if not f2:
            return sum(tree_size(t) for t in f1)
        a, rest1 = f1[0], f1[1:]
        b, rest2 = f2[0], f2[1:]
        delete = fdist(a[1:] + rest1, f2) + 1
        insert = fdist(f1, b[1:] + rest2) + 1
        match = fdist(a[1:], b[1:]) + fdist(rest1, rest2) + (0 if a[0] == b[0] else 1)
        return min(delete, insert, match)

    return fdist((t1,), (t2,))


def tree_to_tuple(tree, node=None):
    node = tree.root if node is None else node
    return (tree.types[node],) + tuple(tree_to_tuple(tree, c) for c in tree.children[node])


class TestASTED:
    def test_identity_zero(self):
        t = parse_sexpr("(A (B) (C))")
        assert zhang_shasha(t, t) == 0

    def test_single_insertion(self):
        assert zhang_shasha(parse_sexpr("(A)"), parse_sexpr("(A (B))")) == 1

    def test_relabel(self):
        assert zhang_shasha(parse_sexpr("(A (B))"), parse_sexpr("(A (C))")) == 1

    def test_matches_brute_force(self):
        rng = random.Random(61)
        for _ in range(60):
            t1 = random_tree(rng, max_nodes=7, vocab=3)
            t2 = random_tree(rng, max_nodes=7, vocab=3)
            assert zhang_shasha(t1, t2) == brute_force_ted(
                tree_to_tuple(t1), tree_to_tuple(t2))

    def test_metric_sanity(self):
        rng = random.Random(71)
        trees = [random_tree(rng, max_nodes=8, vocab=3) for _ in range(6)]
        for a in trees:
            assert zhang_shasha(a, a) == 0
        for a in trees:
            for b in trees:
                assert zhang_shasha(a, b) == zhang_shasha(b, a)
        for a in trees:
            for b in trees:
                for c in trees:
                    assert zhang_shasha(a, c) <= zhang_shasha(a, b) + zhang_shasha(b, c)

    def test_selector_ranks_identical_first(self):
        sources = ["(A (B) (C))", "(X (Y))", "(A (B))"]
        db = make_db(sources)
        q = parse_sexpr("(A (B) (C))")
        assert select_ast_ed(db, q, 3)[0] == 0


class TestEmbeddings:
    def table(self):
        vecs = np.array([
            [1.0, 0.0],
            [0.0, 1.0],
            [1.0, 1.0],
            [0.0, 0.0],   # zero-norm: ranks last
            [-1.0, 0.0],
        ])
        return EmbeddingTable(tuple(f"e{i}" for i in range(5)), vecs)

    def test_query_equal_to_row_first(self):
        assert select_embed_topk(self.table(), [1.0, 0.0], 1) == [0]

    def test_orthogonal_scores_zero(self):
        from castsel.baselines import _cosines

        cos = _cosines(self.table().vectors, np.array([1.0, 0.0]))
        assert cos[1] == pytest.approx(0.0)

    def test_full_ordering_matches_hand_cosines(self):
        # query (2,1): cosines 2/sqrt5, 1/sqrt5, 3/sqrt10, -inf, -2/sqrt5
        order = select_embed_topk(self.table(), [2.0, 1.0], 5)
        assert order == [2, 0, 1, 4, 3]

    def test_dimension_mismatch(self):
        with pytest.raises(BaselineError):
            select_embed_topk(self.table(), [1.0, 0.0, 0.0], 1)

    def test_file_roundtrip(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("dim 2\na 1.0 0.0\nb 0.5 0.5\n")
        table = load_embeddings(path)
        assert table.ids == ("a", "b") and table.dimension == 2
        assert table.vectors[1].tolist() == [0.5, 0.5]

    def test_bad_header(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("2\na 1.0 0.0\n")
        with pytest.raises(BaselineError):
            load_embeddings(path)


class TestDiversity:
    def test_k1_is_global_argmax(self):
        table = EmbeddingTable(("a", "b"), np.array([[1.0, 0.0], [0.7, 0.7]]))
        assert select_diversity(table, [1.0, 0.1], 1, seed=0) == [0]

    def test_two_blobs_one_pick_each(self):
        rng = np.random.default_rng(1)
        blob1 = rng.normal(loc=[10, 0], scale=0.01, size=(6, 2))
        blob2 = rng.normal(loc=[-10, 0], scale=0.01, size=(6, 2))
        vecs = np.vstack([blob1, blob2])
        table = EmbeddingTable(tuple(f"e{i}" for i in range(12)), vecs)
        picks = select_diversity(table, [1.0, 0.0], 2, seed=3)
        sides = {p < 6 for p in picks}
        assert sides == {True, False}

    def test_seed_reproducible(self):
        rng = np.random.default_rng(4)
        vecs = rng.normal(size=(20, 3))
        table = EmbeddingTable(tuple(f"e{i}" for i in range(20)), vecs)
        q = [1.0, 0.0, 0.0]
        assert select_diversity(table, q, 5, seed=9) == select_diversity(table, q, 5, seed=9)

    def test_n_below_k(self):
        table = EmbeddingTable(("a",), np.array([[1.0]]))
        with pytest.raises(BaselineError):
            select_diversity(table, [1.0], 2, seed=0)


class TestCommonContracts:
    def test_all_selectors_distinct_in_range(self):
        texts = [f"text number {i} with token{i % 3}" for i in range(10)]
        db = make_text_db(texts)
        q = "text number with token1"
        rng = np.random.default_rng(5)
        table = EmbeddingTable(tuple(r.id for r in db.records), rng.normal(size=(10, 4)))
        qv = [1.0, 0.0, 0.0, 0.0]
        for positions in [
            select_random(db, 4, seed=0),
            select_ld(db, q, 4),
            select_bm25(db, q, 4),
            select_embed_topk(table, qv, 4),
            select_diversity(table, qv, 4, seed=0),
        ]:
            assert len(positions) == 4
            assert len(set(positions)) == 4
            assert all(0 <= p < 10 for p in positions)

    def test_levenshtein_wrapper(self):
        assert levenshtein("kitten", "sitting") == 3
