"""Command-line surface.

Subcommands: ``index build``, ``select``, ``prompt``, ``bench coverage``,
``em``. CAST_SEED sets every default seed. Exit codes: 0 ok, 2 input
error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import baselines, harness, selector
from .baselines import BaselineError, load_embeddings
from .harness import (
    DEFAULT_TEMPLATE,
    CorpusEntry,
    HarnessError,
    assemble_prompt,
    coverage_curve,
    exact_match,
    load_corpus,
    load_template,
)
from .index import IndexError_, build_database, dump_index_json, load_index, save_index
from .selector import SelectionConfig, SelectionError, SelectionResult
from .tree import SexprAdapter, TreeError

INPUT_ERRORS = (
    HarnessError, BaselineError, SelectionError, IndexError_, TreeError,
    FileNotFoundError, IsADirectoryError, PermissionError, ValueError,
)


def _default_seed() -> int:
    return int(os.environ.get("CAST_SEED", "0"))


def _parse_shots(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


# ---------------------------------------------------------------------------
# subcommand handlers

def cmd_index_build(args) -> int:
    corpus = load_corpus(args.corpus)
    db, report = build_database(corpus, SexprAdapter())
    save_index(db, args.output)
    if args.json_dump:
        dump_index_json(db, args.json_dump)
    print(f"indexed {len(db)} records -> {args.output}")
    for entry_id, reason in report.skipped:
        print(f"warning: skipped {entry_id}: {reason}", file=sys.stderr)
    return 0


def _load_query(path) -> CorpusEntry:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.strip()
    if stripped.startswith("{"):
        doc = json.loads(stripped.splitlines()[0])
        return CorpusEntry(
            id=doc.get("id", "query"),
            source_lang=doc["source_lang"],
            target_lang=doc.get("target_lang", ""),
            source=doc["source"],
            target=doc.get("target", ""),
            tree=doc.get("tree"),
        )
    return CorpusEntry(id="query", source_lang="sexpr", target_lang="",
                       source=stripped, target="", tree=None)


def cmd_select(args) -> int:
    db = load_index(args.index)
    query = _load_query(args.query)
    adapter = SexprAdapter()
    seed = args.seed
    t0 = time.perf_counter()

    from .tree import parse_sexpr

    qtree = parse_sexpr(query.tree) if query.tree else None
    if args.strategy == "cast_f":
        cfg = SelectionConfig(k=args.k, t=args.t)
        result = selector.select_cast_f(db, query.source, query.source_lang, cfg,
                                        adapter, query_tree=qtree)
    elif args.strategy == "cast_a":
        cfg = SelectionConfig(k=args.k, t=args.t, tau=args.tau, k_max=args.k_max)
        result = selector.select_cast_a(db, query.source, query.source_lang, cfg,
                                        adapter, query_tree=qtree)
    else:
        positions = harness._run_strategy(
            args.strategy, db, query, args.k, seed, args.t, args.tau, _tables(args, db), adapter
        )
        tree = adapter.parse(query.tree or query.source, query.source_lang)
        from .fingerprint import fingerprint_tree

        profile = fingerprint_tree(tree)
        cast = harness.selection_cast(db, positions, profile)
        from .bitmatrix import pack_bits

        result = SelectionResult(
            selected=tuple(positions),
            gains=(),
            cast_after=(cast,) if positions else (),
            filled_by_fallback=0,
            coverage_mask=pack_bits([], len(profile.per_node)),
            column_count=len(profile.per_node),
        )
    elapsed_ms = (time.perf_counter() - t0) * 1e3

    trace = {
        "strategy": args.strategy,
        "config": {"k": args.k, "t": args.t, "tau": args.tau, "k_max": args.k_max,
                   "seed": seed, "tie_break": "prerecall_rank"},
        "query_id": query.id,
        "query_source": query.source,
        "selected_positions": list(result.selected),
        "selected_ids": [db.records[p].id for p in result.selected],
        "gains": list(result.gains),
        "cast_after": list(result.cast_after),
        "filled_by_fallback": result.filled_by_fallback,
        "final_cast": result.final_cast,
        "tau_reached": result.tau_reached,
    }
    # Timing is opt-in so traces stay byte-deterministic by default.
    if args.timing:
        trace["timing_ms"] = elapsed_ms
    with open(args.trace, "w", encoding="utf-8") as fh:
        json.dump(trace, fh, indent=2)
        fh.write("\n")
    print(f"selected {len(result.selected)} exemplars, "
          f"final coverage {result.final_cast:.4f} -> {args.trace}")
    return 0


def _tables(args, db):
    path = getattr(args, "embeddings", None)
    if not path:
        return None
    table = load_embeddings(path)
    return (table.align(db), table)


def cmd_prompt(args) -> int:
    with open(args.selection, encoding="utf-8") as fh:
        trace = json.load(fh)
    db = load_index(args.index)
    template = load_template(args.template) if args.template else DEFAULT_TEMPLATE
    positions = trace["selected_positions"]
    result = SelectionResult(
        selected=tuple(positions),
        gains=tuple(trace.get("gains", ())),
        cast_after=tuple(trace.get("cast_after", ())),
        filled_by_fallback=trace.get("filled_by_fallback", 0),
        coverage_mask=None,  # not needed for rendering
        column_count=0,
    )
    prompt = assemble_prompt(result, db, trace["query_source"], template, args.order)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(prompt)
    else:
        sys.stdout.write(prompt)
    return 0


def cmd_bench_coverage(args) -> int:
    db = load_index(args.index)
    queries = load_corpus(args.queries)
    strategies = [s for s in args.strategies.split(",") if s]
    shots = _parse_shots(args.shots)
    embeddings = load_embeddings(args.embeddings) if args.embeddings else None
    rows = coverage_curve(
        db, queries, strategies, shots,
        seed=args.seed, t=args.t, tau=args.tau, embeddings=embeddings,
    )
    lines = ["strategy,shot,mean_cast"]
    lines += [f"{s},{shot},{mean:.10f}" for s, shot, mean in rows]
    csv_text = "\n".join(lines) + "\n"
    with open(args.csv, "w", encoding="utf-8") as fh:
        fh.write(csv_text)
    print(f"wrote {len(rows)} rows -> {args.csv}")
    if args.plot:
        _render_plot(rows, args.plot)
    return 0


def _render_plot(rows, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    by_strategy: dict[str, list[tuple[int, float]]] = {}
    for s, shot, mean in rows:
        by_strategy.setdefault(s, []).append((shot, mean))
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for s, pts in by_strategy.items():
        xs, ys = zip(*sorted(pts))
        ax.plot(xs, ys, marker="o", label=s)
    ax.set_xlabel("shots")
    ax.set_ylabel("mean coverage")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    print(f"plot -> {path}")


def cmd_em(args) -> int:
    with open(args.pred, encoding="utf-8") as fh:
        pred = fh.read()
    with open(args.gold, encoding="utf-8") as fh:
        gold = fh.read()
    ok = exact_match(pred, gold)
    print(f"EM: {'true' if ok else 'false'}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="castsel",
        description="Syntax-coverage exemplar retrieval for code translation prompts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="index maintenance")
    index_sub = p_index.add_subparsers(dest="index_command", required=True)
    p_build = index_sub.add_parser("build", help="build an index from a JSONL corpus")
    p_build.add_argument("corpus")
    p_build.add_argument("-o", "--output", required=True)
    p_build.add_argument("--json-dump", help="also write a JSON debug dump")
    p_build.set_defaults(func=cmd_index_build)

    p_select = sub.add_parser("select", help="select exemplars for one query")
    p_select.add_argument("--index", required=True)
    p_select.add_argument("--query", required=True)
    p_select.add_argument("--strategy", default="cast_f", choices=harness.STRATEGIES)
    p_select.add_argument("-k", type=int, default=5)
    p_select.add_argument("--tau", type=float, default=0.98)
    p_select.add_argument("-t", type=float, default=2.0)
    p_select.add_argument("--k-max", type=int, default=20)
    p_select.add_argument("--seed", type=int, default=_default_seed())
    p_select.add_argument("--embeddings")
    p_select.add_argument("--timing", action="store_true",
                          help="record wall time in the trace (breaks byte determinism)")
    p_select.add_argument("--trace", required=True)
    p_select.set_defaults(func=cmd_select)

    p_prompt = sub.add_parser("prompt", help="render a prompt from a selection trace")
    p_prompt.add_argument("--selection", required=True)
    p_prompt.add_argument("--index", required=True)
    p_prompt.add_argument("--template")
    p_prompt.add_argument("--order", default="selection", choices=("selection", "reversed"))
    p_prompt.add_argument("-o", "--output")
    p_prompt.set_defaults(func=cmd_prompt)

    p_bench = sub.add_parser("bench", help="benchmarks")
    bench_sub = p_bench.add_subparsers(dest="bench_command", required=True)
    p_cov = bench_sub.add_parser("coverage", help="coverage-vs-shots comparison")
    p_cov.add_argument("--index", required=True)
    p_cov.add_argument("--queries", required=True)
    p_cov.add_argument("--strategies", default="cast_f,ld")
    p_cov.add_argument("--shots", default="1,3,5,10,15,20")
    p_cov.add_argument("--csv", required=True)
    p_cov.add_argument("--plot")
    p_cov.add_argument("--seed", type=int, default=_default_seed())
    p_cov.add_argument("-t", type=float, default=2.0)
    p_cov.add_argument("--tau", type=float, default=0.98)
    p_cov.add_argument("--embeddings")
    p_cov.set_defaults(func=cmd_bench_coverage)

    p_em = sub.add_parser("em", help="exact-match check between two files")
    p_em.add_argument("--pred", required=True)
    p_em.add_argument("--gold", required=True)
    p_em.set_defaults(func=cmd_em)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - invariant violations
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
