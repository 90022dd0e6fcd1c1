#!/usr/bin/env python3
"""Generate the shipped desk-scale corpora and supporting data files.

Outputs (all deterministic, seed fixed below):
  data/desk_corpus.jsonl      exemplar database in a small expression language
  data/desk_queries.jsonl     held-out queries combining several construct families
  data/closure_corpus.jsonl   200-entry corpus for the descendant-closure check
  data/desk_embeddings.txt    node-type histogram embeddings for all ids
  data/fingerprint_vectors.txt  published hash test vectors

The expression language is rendered two ways: a pythonish surface for the
source side and a c-ish surface for the target side. Variable names are
random render-time noise that never reaches the tree, so lexical distance
is a deliberately imperfect proxy for structure.
"""

from __future__ import annotations

import json
import math
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from castsel.fingerprint import fnv1a_fold, fingerprint_tree  # noqa: E402
from castsel.tree import parse_sexpr  # noqa: E402

SEED = 20240817
OUT = Path(__file__).resolve().parent.parent / "data"

VOCAB = [
    "program", "func", "params", "param", "block", "decl", "assign", "if",
    "ifelse", "while", "for", "return", "call", "args", "add", "sub", "mul",
    "div", "mod", "lt", "gt", "eq", "neq", "and", "or", "not", "neg", "var",
    "num",
]

FAMILIES = {
    "arith": ["add", "sub", "mul"],
    "intdiv": ["div", "mod"],
    "compare": ["lt", "gt", "eq", "neq"],
    "logic": ["and", "or", "not"],
    "branch": ["if", "ifelse"],
    "loop": ["while", "for"],
    "call": ["call"],
    "decl": ["decl"],
}
FAMILY_NAMES = list(FAMILIES)


# ---------------------------------------------------------------------------
# tree construction (nested tuples: (type, child, ...))

def gen_expr(rng, families, depth):
    leaf = ("var",) if rng.random() < 0.6 else ("num",)
    if depth <= 0:
        return leaf
    ops = []
    if "arith" in families:
        ops += FAMILIES["arith"]
    if "intdiv" in families:
        ops += FAMILIES["intdiv"]
    if not ops or rng.random() < 0.3:
        return leaf
    op = rng.choice(ops)
    return (op, gen_expr(rng, families, depth - 1), gen_expr(rng, families, depth - 1))


def gen_cond(rng, families, depth):
    cmp_ops = FAMILIES["compare"] if "compare" in families else ["lt"]
    base = (rng.choice(cmp_ops), gen_expr(rng, families, 1), gen_expr(rng, families, 1))
    if "logic" in families and depth > 0 and rng.random() < 0.5:
        op = rng.choice(["and", "or"])
        other = (rng.choice(cmp_ops), gen_expr(rng, families, 1), gen_expr(rng, families, 1))
        base = (op, base, other)
        if rng.random() < 0.25:
            base = ("not", base)
    return base


def gen_stmt(rng, families, depth):
    kinds = ["assign"]
    if "decl" in families:
        kinds.append("decl")
    if "branch" in families and depth > 0:
        kinds += ["if", "ifelse"]
    if "loop" in families and depth > 0:
        kinds += ["while", "for"]
    if "call" in families:
        kinds.append("call_stmt")
    kind = rng.choice(kinds)
    if kind == "decl":
        return ("decl", ("var",), ("num",))
    if kind == "assign":
        return ("assign", ("var",), gen_expr(rng, families, 2))
    if kind == "if":
        return ("if", gen_cond(rng, families, 1), gen_block(rng, families, depth - 1, 1, 2))
    if kind == "ifelse":
        return ("ifelse", gen_cond(rng, families, 1),
                gen_block(rng, families, depth - 1, 1, 2),
                gen_block(rng, families, depth - 1, 1, 2))
    if kind == "while":
        return ("while", gen_cond(rng, families, 1), gen_block(rng, families, depth - 1, 1, 2))
    if kind == "for":
        return ("for", ("var",), ("num",), gen_block(rng, families, depth - 1, 1, 2))
    if kind == "call_stmt":
        nargs = rng.randint(0, 3)
        return ("call", ("var",), ("args",) + tuple(gen_expr(rng, families, 1)
                                                    for _ in range(nargs)))
    raise AssertionError(kind)


def gen_block(rng, families, depth, lo, hi):
    return ("block",) + tuple(gen_stmt(rng, families, depth) for _ in range(rng.randint(lo, hi)))


def gen_program(rng, families, n_stmts, depth=2):
    nparams = rng.randint(0, 2)
    params = ("params",) + tuple(("param",) for _ in range(nparams))
    body = ("block",) + tuple(gen_stmt(rng, families, depth) for _ in range(n_stmts))
    ret = ("return", gen_expr(rng, families, 1))
    return ("program", ("func", params, ("block",) + body[1:] + (ret,)))


# ---------------------------------------------------------------------------
# serialization and rendering

def to_sexpr(node) -> str:
    head, *kids = node
    if not kids:
        return f"({head})"
    return "(" + head + " " + " ".join(to_sexpr(k) for k in kids) + ")"


def count_nodes(node) -> int:
    return 1 + sum(count_nodes(k) for k in node[1:])


class Renderer:
    """Name/number assignment is render-local so the text carries noise
    that the type-only tree does not."""

    def __init__(self, rng):
        self.rng = rng
        self.names = ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j",
                      "acc", "tmp", "idx", "val", "res", "cnt"]
        self.fn_names = ["calc", "run", "proc", "work", "step", "eval"]

    def name(self):
        return self.rng.choice(self.names)

    def num(self):
        return str(self.rng.randint(0, 99))

    def expr(self, node, c_style):
        head = node[0]
        if head == "var":
            return self.name()
        if head == "num":
            return self.num()
        if head == "neg":
            return "-" + self.expr(node[1], c_style)
        if head == "not":
            inner = self.expr(node[1], c_style)
            return ("!(" + inner + ")") if c_style else ("not (" + inner + ")")
        ops = {"add": "+", "sub": "-", "mul": "*", "div": "//", "mod": "%",
               "lt": "<", "gt": ">", "eq": "==", "neq": "!=",
               "and": "and", "or": "or"}
        op = ops[head]
        if c_style:
            op = {"//": "/", "and": "&&", "or": "||"}.get(op, op)
        return "(" + self.expr(node[1], c_style) + " " + op + " " + self.expr(node[2], c_style) + ")"

    def stmt_lines(self, node, c_style, indent):
        pad = "    " * indent
        head = node[0]
        if head == "decl":
            v, n = self.name(), self.num()
            return [pad + (f"int {v} = {n};" if c_style else f"{v} = {n}")]
        if head == "assign":
            v = self.name()
            e = self.expr(node[2], c_style)
            return [pad + (f"{v} = {e};" if c_style else f"{v} = {e}")]
        if head == "return":
            e = self.expr(node[1], c_style)
            return [pad + (f"return {e};" if c_style else f"return {e}")]
        if head == "call":
            fn = self.rng.choice(self.fn_names)
            args = ", ".join(self.expr(a, c_style) for a in node[2][1:])
            return [pad + (f"{fn}({args});" if c_style else f"{fn}({args})")]
        if head == "if":
            cond = self.expr(node[1], c_style)
            body = self.block_lines(node[2], c_style, indent + 1)
            if c_style:
                return [pad + f"if ({cond}) {{"] + body + [pad + "}"]
            return [pad + f"if {cond}:"] + body
        if head == "ifelse":
            cond = self.expr(node[1], c_style)
            then = self.block_lines(node[2], c_style, indent + 1)
            other = self.block_lines(node[3], c_style, indent + 1)
            if c_style:
                return ([pad + f"if ({cond}) {{"] + then + [pad + "} else {"]
                        + other + [pad + "}"])
            return [pad + f"if {cond}:"] + then + [pad + "else:"] + other
        if head == "while":
            cond = self.expr(node[1], c_style)
            body = self.block_lines(node[2], c_style, indent + 1)
            if c_style:
                return [pad + f"while ({cond}) {{"] + body + [pad + "}"]
            return [pad + f"while {cond}:"] + body
        if head == "for":
            v, n = self.name(), self.num()
            body = self.block_lines(node[3], c_style, indent + 1)
            if c_style:
                return [pad + f"for (int {v} = 0; {v} < {n}; {v}++) {{"] + body + [pad + "}"]
            return [pad + f"for {v} in range({n}):"] + body
        raise AssertionError(head)

    def block_lines(self, node, c_style, indent):
        lines = []
        for stmt in node[1:]:
            lines.extend(self.stmt_lines(stmt, c_style, indent))
        return lines or ["    " * indent + ("{}" if c_style else "pass")]

    def program(self, node, c_style):
        func = node[1]
        params = func[1]
        body = func[2]
        fn = self.rng.choice(self.fn_names)
        names = [self.name() for _ in params[1:]]
        if c_style:
            sig = ", ".join(f"int {n}" for n in names)
            return "\n".join([f"int {fn}({sig}) {{"]
                             + self.block_lines(body, True, 1) + ["}"]) + "\n"
        sig = ", ".join(names)
        return "\n".join([f"def {fn}({sig}):"]
                         + self.block_lines(body, False, 1)) + "\n"


# ---------------------------------------------------------------------------
# corpus assembly

def make_entry(rng, entry_id, families, n_stmts, depth=2):
    tree = gen_program(rng, families, n_stmts, depth)
    r1 = Renderer(random.Random(rng.random()))
    r2 = Renderer(random.Random(rng.random()))
    return {
        "id": entry_id,
        "source_lang": "minipy",
        "target_lang": "minic",
        "source": r1.program(tree, c_style=False),
        "target": r2.program(tree, c_style=True),
        "tree": to_sexpr(tree),
    }


def histogram_embedding(tree_sexpr: str) -> list[float]:
    tree = parse_sexpr(tree_sexpr)
    counts = {v: 0 for v in VOCAB}
    for label in tree.types:
        counts[label] += 1
    vec = [counts[v] for v in VOCAB]
    norm = math.sqrt(sum(x * x for x in vec)) or 1.0
    return [x / norm for x in vec]


def main():
    OUT.mkdir(exist_ok=True)
    rng = random.Random(SEED)

    # Exemplars: narrow programs, 1-2 construct families each.
    exemplars = []
    i = 0
    for fam in FAMILY_NAMES:
        for _ in range(12):
            fams = {fam, rng.choice(FAMILY_NAMES)}
            exemplars.append(make_entry(rng, f"ex{i:04d}", fams, rng.randint(2, 4)))
            i += 1
    while len(exemplars) < 168:
        fams = set(rng.sample(FAMILY_NAMES, 2))
        exemplars.append(make_entry(rng, f"ex{i:04d}", fams, rng.randint(2, 4)))
        i += 1

    # Queries: broad programs spanning 4-6 families.
    queries = []
    for qi in range(32):
        fams = set(rng.sample(FAMILY_NAMES, rng.randint(4, 6)))
        queries.append(make_entry(rng, f"q{qi:03d}", fams, rng.randint(6, 10), depth=2))

    with open(OUT / "desk_corpus.jsonl", "w") as fh:
        for e in exemplars:
            fh.write(json.dumps(e) + "\n")
    with open(OUT / "desk_queries.jsonl", "w") as fh:
        for e in queries:
            fh.write(json.dumps(e) + "\n")

    # Closure-check corpus: 200 entries, mixed breadth.
    rng2 = random.Random(SEED + 1)
    with open(OUT / "closure_corpus.jsonl", "w") as fh:
        for ci in range(200):
            fams = set(rng2.sample(FAMILY_NAMES, rng2.randint(1, 4)))
            entry = make_entry(rng2, f"cl{ci:04d}", fams, rng2.randint(2, 6))
            fh.write(json.dumps(entry) + "\n")

    # Node-type histogram embeddings for every exemplar and query id.
    with open(OUT / "desk_embeddings.txt", "w") as fh:
        fh.write(f"dim {len(VOCAB)}\n")
        for e in exemplars + queries:
            vec = histogram_embedding(e["tree"])
            fh.write(e["id"] + " " + " ".join(f"{x:.8f}" for x in vec) + "\n")

    # Published hash test vectors: labels and whole trees.
    labels = ["program", "func", "assign", "A", "B"]
    sexprs = ["(A)", "(A (B))", "(A (B) (C))", "(A (C) (B))",
              "(program (func (params) (block (return (var)))))"]
    with open(OUT / "fingerprint_vectors.txt", "w") as fh:
        for lab in labels:
            fh.write(f"label\t{lab}\t{fnv1a_fold(lab.encode()):016x}\n")
        for sx in sexprs:
            fp = fingerprint_tree(parse_sexpr(sx)).root_fingerprint
            fh.write(f"sexpr\t{sx}\t{fp:016x}\n")

    print(f"exemplars={len(exemplars)} queries={len(queries)}")
    sizes = [count_nodes_from(e) for e in exemplars]
    qsizes = [count_nodes_from(q) for q in queries]
    print(f"exemplar nodes: min={min(sizes)} max={max(sizes)} mean={sum(sizes)/len(sizes):.1f}")
    print(f"query nodes: min={min(qsizes)} max={max(qsizes)} mean={sum(qsizes)/len(qsizes):.1f}")


def count_nodes_from(entry):
    return parse_sexpr(entry["tree"]).node_count


if __name__ == "__main__":
    main()
