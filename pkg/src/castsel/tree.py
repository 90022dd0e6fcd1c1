"""Type-only syntax trees and the S-expression ingestion format.

Trees carry node-type labels only; lexical values are stripped by whatever
parser adapter produced them. The S-expression path exists so everything in
this package can be exercised without any real-language parser installed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

__all__ = [
    "TreeError",
    "SexprParseError",
    "TypedTree",
    "ParserAdapter",
    "SexprAdapter",
    "parse_sexpr",
    "to_sexpr",
    "validate_label",
]

_FORBIDDEN = set("()")


class TreeError(ValueError):
    """Structurally invalid tree or node label."""


class SexprParseError(TreeError):
    """Malformed S-expression input; carries the byte offset of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


def validate_label(label: str) -> str:
    """Check a node-type label: non-empty, no whitespace, no parentheses."""
    if not label:
        raise TreeError("node-type label must be non-empty")
    for ch in label:
        if ch.isspace() or ch in _FORBIDDEN:
            raise TreeError(f"node-type label {label!r} contains {ch!r}")
    return label


@dataclass(frozen=True)
class TypedTree:
    """Rooted ordered tree of node-type labels.

    ``types[i]`` is the label of node ``i``; ``children[i]`` lists its child
    node indices in parser order. Immutable after construction, so instances
    are safe to share across threads.
    """

    types: tuple[str, ...]
    children: tuple[tuple[int, ...], ...]
    root: int = 0
    _postorder: tuple[int, ...] = field(default=None, repr=False, compare=False)  # type: ignore[assignment]

    def __post_init__(self):
        n = len(self.types)
        if n == 0:
            raise TreeError("tree must have at least one node")
        if len(self.children) != n:
            raise TreeError("types/children length mismatch")
        if not 0 <= self.root < n:
            raise TreeError("root index out of range")
        for label in self.types:
            validate_label(label)
        parent_seen = [False] * n
        for kids in self.children:
            for c in kids:
                if not 0 <= c < n:
                    raise TreeError(f"child index {c} out of range")
                if parent_seen[c]:
                    raise TreeError(f"node {c} has more than one parent")
                parent_seen[c] = True
        if parent_seen[self.root]:
            raise TreeError("root must not have a parent")
        orphans = [i for i in range(n) if i != self.root and not parent_seen[i]]
        if orphans:
            raise TreeError(f"nodes unreachable from root: {orphans}")
        object.__setattr__(self, "_postorder", self._compute_postorder())

    def _compute_postorder(self) -> tuple[int, ...]:
        order = []
        stack = [(self.root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
            else:
                stack.append((node, True))
                stack.extend((c, False) for c in reversed(self.children[node]))
        if len(order) != len(self.types):
            raise TreeError("cycle detected: traversal did not visit every node once")
        return tuple(order)

    @property
    def node_count(self) -> int:
        return len(self.types)

    def postorder(self) -> tuple[int, ...]:
        """Node indices in post-order (children before parent, root last)."""
        return self._postorder


class ParserAdapter(Protocol):
    """Contract for plugging in a real-language parser.

    Implementations must strip value attributes before returning: the core
    only ever sees node-type labels.
    """

    def parse(self, source_text: str, language_id: str) -> TypedTree: ...


def parse_sexpr(text: str) -> TypedTree:
    """Parse ``(label child*)`` notation into a TypedTree.

    Grammar: ``tree := "(" label tree* ")"`` with whitespace separation.
    Raises SexprParseError with a byte offset on malformed input.
    """
    data = text
    n = len(data)
    pos = 0
    types: list[str] = []
    children: list[list[int]] = []
    stack: list[int] = []  # indices of currently open nodes
    root = -1

    def skip_ws(p: int) -> int:
        while p < n and data[p].isspace():
            p += 1
        return p

    pos = skip_ws(pos)
    if pos >= n:
        raise SexprParseError("empty input", pos)
    while pos < n:
        ch = data[pos]
        if ch == "(":
            pos += 1
            pos = skip_ws(pos)
            start = pos
            while pos < n and not data[pos].isspace() and data[pos] not in _FORBIDDEN:
                pos += 1
            label = data[start:pos]
            if not label:
                raise SexprParseError("expected node-type label", start)
            idx = len(types)
            types.append(label)
            children.append([])
            if stack:
                children[stack[-1]].append(idx)
            elif root >= 0:
                raise SexprParseError("trailing garbage after root tree", start - 1)
            else:
                root = idx
            stack.append(idx)
        elif ch == ")":
            if not stack:
                raise SexprParseError("unbalanced ')'", pos)
            stack.pop()
            pos += 1
        else:
            raise SexprParseError(f"unexpected character {ch!r}", pos)
        pos = skip_ws(pos)

    if stack:
        raise SexprParseError("unbalanced '(': input ended inside a tree", n)
    return TypedTree(tuple(types), tuple(tuple(k) for k in children), root)


def to_sexpr(tree: TypedTree) -> str:
    """Canonical serialization: single-space separators, parser child order.

    Inverse of parse_sexpr; two trees serialize equally iff they are
    node-for-node equal, which makes this the collision oracle for
    fingerprint tests.
    """
    # iterative to survive deep trees
    out: list[str] = []
    stack: list[object] = [tree.root]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        kids = tree.children[item]
        out.append("(" + tree.types[item])
        stack.append(")")
        for c in reversed(kids):
            stack.append(c)
            stack.append(" ")
    return "".join(out)


class SexprAdapter:
    """Adapter whose "language" is the S-expression format itself."""

    language_ids = ("sexpr",)

    def parse(self, source_text: str, language_id: str = "sexpr") -> TypedTree:
        return parse_sexpr(source_text)
