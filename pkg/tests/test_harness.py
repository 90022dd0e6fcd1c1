import json

import pytest

from castsel.harness import (
    DEFAULT_TEMPLATE,
    CorpusEntry,
    HarnessError,
    PromptTemplate,
    assemble_prompt,
    coverage_curve,
    exact_match,
    load_corpus,
    load_template,
    selection_cast,
)
from castsel.index import build_database
from castsel.selector import SelectionConfig, select_cast_f
from castsel.tree import SexprAdapter
from castsel.fingerprint import fingerprint_tree
from castsel.tree import parse_sexpr

ADAPTER = SexprAdapter()

MINIMAL = PromptTemplate(
    header="H:{source_lang}>{target_lang}\n",
    exemplar_block="E[{source}=>{target}]\n",
    query_block="Q[{source}]\n",
)


def corpus_entries():
    return [
        CorpusEntry(id="a", source_lang="sexpr", target_lang="out",
                    source="(A (B) (C))", target="TA"),
        CorpusEntry(id="b", source_lang="sexpr", target_lang="out",
                    source="(D (B))", target="TB"),
        CorpusEntry(id="c", source_lang="sexpr", target_lang="out",
                    source="(E (C))", target="TC"),
    ]


@pytest.fixture
def db():
    database, _ = build_database(corpus_entries(), ADAPTER)
    return database


class TestCorpusIO:
    def test_load(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text(
            '{"id":"x","source_lang":"sexpr","target_lang":"y","source":"(A)","target":"t"}\n'
            "\n"
            '{"id":"z","source_lang":"sexpr","target_lang":"y","source":"(B)","target":"u","tree":"(B)"}\n'
        )
        entries = load_corpus(path)
        assert [e.id for e in entries] == ["x", "z"]
        assert entries[1].tree == "(B)"

    def test_duplicate_id(self, tmp_path):
        path = tmp_path / "c.jsonl"
        line = '{"id":"x","source_lang":"s","target_lang":"y","source":"(A)","target":"t"}\n'
        path.write_text(line + line)
        with pytest.raises(HarnessError, match="duplicate"):
            load_corpus(path)

    def test_missing_field(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"id":"x"}\n')
        with pytest.raises(HarnessError, match="missing field"):
            load_corpus(path)


class TestPrompt:
    def test_exact_concatenation(self, db):
        r = select_cast_f(db, "(A (B) (C))", "sexpr", SelectionConfig(k=1), ADAPTER)
        prompt = assemble_prompt(r, db, "(A (B) (C))", MINIMAL)
        assert prompt == "H:sexpr>out\nE[(A (B) (C))=>TA]\nQ[(A (B) (C))]\n"

    def test_reversed_order(self, db):
        r = select_cast_f(db, "(A (B) (C))", "sexpr", SelectionConfig(k=2), ADAPTER)
        fwd = assemble_prompt(r, db, "(A)", MINIMAL)
        rev = assemble_prompt(r, db, "(A)", MINIMAL, order_policy="reversed")
        assert fwd != rev
        assert sorted(fwd.splitlines()) == sorted(rev.splitlines())

    def test_selection_order_is_gain_order(self, db):
        r = select_cast_f(db, "(A (B) (C))", "sexpr", SelectionConfig(k=3), ADAPTER)
        prompt = assemble_prompt(r, db, "(A (B) (C))", MINIMAL)
        first_block = prompt.splitlines()[1]
        assert db.records[r.selected[0]].target_text in first_block
        assert list(r.gains) == sorted(r.gains, reverse=True)

    def test_unknown_placeholder(self, db):
        bad = PromptTemplate(header="{nope}", exemplar_block="", query_block="")
        r = select_cast_f(db, "(A)", "sexpr", SelectionConfig(k=1), ADAPTER)
        with pytest.raises(HarnessError, match="placeholder"):
            assemble_prompt(r, db, "(A)", bad)

    def test_empty_selection_rejected(self, db):
        from castsel.selector import SelectionResult
        import numpy as np

        empty = SelectionResult((), (), (), 0, np.zeros(1, dtype=np.uint64), 1)
        with pytest.raises(HarnessError):
            assemble_prompt(empty, db, "(A)", MINIMAL)

    def test_template_file(self, tmp_path):
        path = tmp_path / "t.json"
        path.write_text(json.dumps({
            "header": "h", "exemplar_block": "e", "query_block": "q"}))
        t = load_template(path)
        assert (t.header, t.exemplar_block, t.query_block) == ("h", "e", "q")

    def test_default_template_renders(self, db):
        r = select_cast_f(db, "(A (B) (C))", "sexpr", SelectionConfig(k=1), ADAPTER)
        prompt = assemble_prompt(r, db, "(A (B) (C))", DEFAULT_TEMPLATE)
        assert "### Source (sexpr)" in prompt
        assert prompt.endswith("```\n")


class TestExactMatch:
    def test_identical(self):
        assert exact_match("int x = 1;", "int x = 1;")

    def test_different_identifier(self):
        assert not exact_match("int x = 1;", "int y = 1;")

    def test_trailing_newline_normalized(self):
        assert exact_match("a\nb\n", "a\nb")

    def test_trailing_spaces_normalized(self):
        assert exact_match("a  \nb", "a\nb")

    def test_leading_space_significant(self):
        assert not exact_match("  a", "a")


class TestCoverageCurve:
    def test_identical_exemplar_gives_full_coverage(self, db):
        queries = [CorpusEntry(id="q", source_lang="sexpr", target_lang="out",
                               source="(A (B) (C))", target="")]
        rows = coverage_curve(db, queries, ["cast_f"], [1])
        assert rows == [("cast_f", 1, 1.0)]

    def test_exhaustion_reaches_max(self, db):
        queries = [CorpusEntry(id="q", source_lang="sexpr", target_lang="out",
                               source="(A (B) (Z))", target="")]
        rows = coverage_curve(db, queries, ["cast_f", "ld"], [3])
        profile = fingerprint_tree(parse_sexpr("(A (B) (Z))"))
        best = selection_cast(db, [0, 1, 2], profile)
        assert all(mean == pytest.approx(best) for _, _, mean in rows)

    def test_unknown_strategy(self, db):
        with pytest.raises(HarnessError):
            coverage_curve(db, [], ["nope"], [1])

    def test_shot_above_corpus(self, db):
        with pytest.raises(HarnessError):
            coverage_curve(db, [], ["ld"], [99])

    def test_descending_shots_rejected(self, db):
        with pytest.raises(HarnessError):
            coverage_curve(db, [], ["ld"], [3, 1])

    def test_nested_topk_monotone(self, db):
        queries = [CorpusEntry(id="q", source_lang="sexpr", target_lang="out",
                               source="(A (B) (C))", target="")]
        for strategy in ("ld", "bm25"):
            rows = coverage_curve(db, queries, [strategy], [1, 2, 3])
            means = [m for _, _, m in rows]
            assert means == sorted(means)
