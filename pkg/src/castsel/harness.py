"""Corpus ingestion, prompt assembly, the exact-match metric, and the
coverage-convergence benchmark."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Sequence

from . import baselines, selector
from .fingerprint import FingerprintProfile, fingerprint_tree
from .index import ExemplarDatabase, build_cooccurrence
from .selector import SelectionConfig, SelectionResult
from .tree import SexprAdapter, parse_sexpr

__all__ = [
    "HarnessError",
    "CorpusEntry",
    "load_corpus",
    "PromptTemplate",
    "DEFAULT_TEMPLATE",
    "load_template",
    "assemble_prompt",
    "exact_match",
    "selection_cast",
    "coverage_curve",
    "STRATEGIES",
]

STRATEGIES = (
    "cast_f", "cast_a", "ld", "random", "bm25", "fixed", "ast_ed", "embed", "diversity",
)


class HarnessError(ValueError):
    pass


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    source_lang: str
    target_lang: str
    source: str
    target: str
    tree: str | None = None  # pre-parsed source AST as an S-expression


def load_corpus(path) -> list[CorpusEntry]:
    """Read a JSON Lines corpus; ids must be unique within the file."""
    entries: list[CorpusEntry] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise HarnessError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            try:
                entry = CorpusEntry(
                    id=doc["id"],
                    source_lang=doc["source_lang"],
                    target_lang=doc["target_lang"],
                    source=doc["source"],
                    target=doc["target"],
                    tree=doc.get("tree"),
                )
            except KeyError as exc:
                raise HarnessError(f"{path}:{lineno}: missing field {exc}") from exc
            if entry.id in seen:
                raise HarnessError(f"{path}:{lineno}: duplicate id {entry.id!r}")
            seen.add(entry.id)
            entries.append(entry)
    return entries


# ---------------------------------------------------------------------------
# prompts

@dataclass(frozen=True)
class PromptTemplate:
    """Byte-deterministic prompt layout.

    ``header`` and ``query_block`` may use {source_lang}, {target_lang} and
    (query block only) {source}; ``exemplar_block`` additionally {target}.
    """

    header: str
    exemplar_block: str
    query_block: str
    version: str = "v1"


DEFAULT_TEMPLATE = PromptTemplate(
    header=(
        "Translate the following {source_lang} code to {target_lang}.\n"
        "Use the examples as a guide.\n\n"
    ),
    exemplar_block=(
        "### Source ({source_lang})\n```\n{source}\n```\n"
        "### Target ({target_lang})\n```\n{target}\n```\n\n"
    ),
    query_block=(
        "### Source ({source_lang})\n```\n{source}\n```\n"
        "### Target ({target_lang})\n```\n"
    ),
)

_PLACEHOLDER_RE = re.compile(r"\{(\w+)\}")


def load_template(path) -> PromptTemplate:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        return PromptTemplate(
            header=doc["header"],
            exemplar_block=doc["exemplar_block"],
            query_block=doc["query_block"],
            version=doc.get("version", "custom"),
        )
    except KeyError as exc:
        raise HarnessError(f"template file missing field {exc}") from exc


def _render(text: str, values: dict[str, str]) -> str:
    def sub(m: re.Match) -> str:
        name = m.group(1)
        if name not in values:
            raise HarnessError(f"unknown placeholder {{{name}}}")
        return values[name]

    return _PLACEHOLDER_RE.sub(sub, text)


def assemble_prompt(
    selection: SelectionResult,
    db: ExemplarDatabase,
    query_source: str,
    template: PromptTemplate = DEFAULT_TEMPLATE,
    order_policy: str = "selection",
) -> str:
    """Header + one block per selected exemplar + query block.

    Default order is selection order (highest marginal gain first);
    "reversed" flips the exemplar blocks only.
    """
    if not selection.selected:
        raise HarnessError("selection is empty")
    positions = list(selection.selected)
    if order_policy == "reversed":
        positions.reverse()
    elif order_policy != "selection":
        raise HarnessError(f"unknown order policy {order_policy!r}")
    first = db.records[positions[0]]
    parts = [_render(template.header, {
        "source_lang": first.source_lang, "target_lang": first.target_lang,
    })]
    for pos in positions:
        rec = db.records[pos]
        parts.append(_render(template.exemplar_block, {
            "source_lang": rec.source_lang,
            "target_lang": rec.target_lang,
            "source": rec.source_text,
            "target": rec.target_text,
        }))
    parts.append(_render(template.query_block, {
        "source_lang": first.source_lang,
        "target_lang": first.target_lang,
        "source": query_source,
    }))
    return "".join(parts)


# ---------------------------------------------------------------------------
# metrics

def _normalize(text: str) -> str:
    return "\n".join(line.rstrip() for line in text.split("\n")).rstrip("\n")


def exact_match(prediction: str, gold: str) -> bool:
    """Byte equality after stripping per-line trailing whitespace and
    trailing newlines."""
    return _normalize(prediction) == _normalize(gold)


# ---------------------------------------------------------------------------
# coverage benchmark

def selection_cast(db: ExemplarDatabase, positions: Sequence[int],
                   query_profile: FingerprintProfile) -> float:
    """Coverage ratio of the query tree achieved by the given exemplars."""
    if not positions:
        return 0.0
    matrix = build_cooccurrence(db, list(positions), query_profile)
    covered = selector.coverage_value(matrix, range(matrix.row_count))
    return covered / matrix.column_count


def _run_strategy(strategy: str, db: ExemplarDatabase, query: CorpusEntry,
                  shot: int, seed: int, t: float, tau: float,
                  tables, adapter, ld_order=None) -> list[int]:
    qtree = parse_sexpr(query.tree) if query.tree else None
    if strategy == "cast_f":
        cfg = SelectionConfig(k=shot, t=t)
        return list(selector.select_cast_f(db, query.source, query.source_lang,
                                           cfg, adapter, query_tree=qtree,
                                           prerecall_order=ld_order).selected)
    if strategy == "cast_a":
        cfg = SelectionConfig(k=shot, t=t, tau=tau, k_max=shot)
        return list(selector.select_cast_a(db, query.source, query.source_lang,
                                           cfg, adapter, query_tree=qtree,
                                           prerecall_order=ld_order).selected)
    if strategy == "ld":
        if ld_order is not None:
            return list(ld_order[:shot])
        return baselines.select_ld(db, query.source, shot)
    if strategy == "random":
        return baselines.select_random(db, shot, seed)
    if strategy == "bm25":
        return baselines.select_bm25(db, query.source, shot)
    if strategy == "fixed":
        return list(range(min(shot, len(db))))
    if strategy == "ast_ed":
        qtree = (parse_sexpr(query.tree) if query.tree
                 else adapter.parse(query.source, query.source_lang))
        return baselines.select_ast_ed(db, qtree, shot)
    if strategy == "embed":
        table, qvec = _embedding_inputs(tables, query)
        return baselines.select_embed_topk(table, qvec, shot)
    if strategy == "diversity":
        table, qvec = _embedding_inputs(tables, query)
        return baselines.select_diversity(table, qvec, shot, seed)
    raise HarnessError(f"unknown strategy {strategy!r}")


def _embedding_inputs(tables, query):
    """Unpack (aligned table, query-vector lookup) and resolve the query vector."""
    if tables is None:
        raise HarnessError("this strategy needs an embedding table")
    aligned, lookup = tables
    by_id = {eid: i for i, eid in enumerate(lookup.ids)}
    if query.id not in by_id:
        raise HarnessError(f"no embedding for query id {query.id!r}")
    return aligned, lookup.vectors[by_id[query.id]]


def coverage_curve(
    db: ExemplarDatabase,
    queries: Sequence[CorpusEntry],
    strategies: Sequence[str],
    shots: Sequence[int],
    *,
    seed: int = 0,
    t: float = 2.0,
    tau: float = 0.98,
    embeddings: baselines.EmbeddingTable | None = None,
    query_table: baselines.EmbeddingTable | None = None,
    adapter=None,
) -> list[tuple[str, int, float]]:
    """Mean coverage ratio per (strategy, shot), averaged over the queries."""
    adapter = adapter or SexprAdapter()
    if list(shots) != sorted(shots):
        raise HarnessError("shot list must be ascending")
    for s in strategies:
        if s not in STRATEGIES:
            raise HarnessError(f"unknown strategy {s!r}")
    for shot in shots:
        if shot > len(db):
            raise HarnessError(f"shot {shot} exceeds corpus size {len(db)}")
    tables = None
    if embeddings is not None:
        lookup = query_table if query_table is not None else embeddings
        tables = (embeddings.align(db), lookup)

    profiles = []
    for q in queries:
        tree = parse_sexpr(q.tree) if q.tree else adapter.parse(q.source, q.source_lang)
        profiles.append(fingerprint_tree(tree))

    # the LD ranking is shot-independent, so compute it once per query and
    # share it across shots and across the cast_f/cast_a/ld strategies
    need_ld = bool(db.records) and any(
        s in ("cast_f", "cast_a", "ld") for s in strategies)
    ld_orders: list[list[int] | None] = [None] * len(queries)
    if need_ld:
        for qi, q in enumerate(queries):
            ld_orders[qi] = selector.prerecall_ld(db, q.source, len(db))

    rows: list[tuple[str, int, float]] = []
    for strategy in strategies:
        for shot in shots:
            total = 0.0
            for qi, (q, profile) in enumerate(zip(queries, profiles)):
                q_seed = seed * 1_000_003 + qi * 997 + shot
                positions = _run_strategy(strategy, db, q, shot, q_seed, t, tau,
                                          tables, adapter, ld_order=ld_orders[qi])
                total += selection_cast(db, positions, profile)
            rows.append((strategy, shot, total / len(queries)))
    return rows
