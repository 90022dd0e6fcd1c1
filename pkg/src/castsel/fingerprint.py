"""Deterministic 64-bit subtree fingerprints.

Every rooted subtree of a typed tree gets a fingerprint in one post-order
pass. For node r the value is built as

    fp = 0
    for each child c in order:  fp = mix64(fp +64 fp(c))
    fp = mix64(fp +64 hash_label(r.type))

where ``+64`` is wrapping 64-bit addition. Child order matters because each
addition is re-mixed before the next child folds in.

The hash primitive is seedless and fixed forever: an FNV-1a fold over the
input bytes followed by a splitmix64-style finalizer. ``hash_label`` folds
the label's UTF-8 bytes; ``mix64`` folds the 8-byte little-endian encoding
of a 64-bit integer. Published test vectors live in
``data/fingerprint_vectors.txt`` and are checked by the test suite.

Collisions are accepted probabilistically at runtime (64-bit space); the
test suite uses canonical S-expression equality as the collision oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

from .tree import TypedTree, validate_label

__all__ = [
    "MASK64",
    "fnv1a_fold",
    "mix64",
    "hash_label",
    "fingerprint_node_type",
    "FingerprintProfile",
    "fingerprint_tree",
    "subtree_multiset_size",
]

MASK64 = 0xFFFFFFFFFFFFFFFF

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a_fold(data: bytes) -> int:
    """FNV-1a over raw bytes, then a splitmix64 finalizer for avalanche."""
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & MASK64
    # splitmix64 finalizer
    h ^= h >> 30
    h = (h * 0xBF58476D1CE4E5B9) & MASK64
    h ^= h >> 27
    h = (h * 0x94D049BB133111EB) & MASK64
    h ^= h >> 31
    return h


def mix64(x: int) -> int:
    """The fixed hash primitive H over a 64-bit value (8-byte LE encoding)."""
    return fnv1a_fold((x & MASK64).to_bytes(8, "little"))


def hash_label(label: str) -> int:
    return fnv1a_fold(label.encode("utf-8"))


def fingerprint_node_type(label: str) -> int:
    """Stable 64-bit fingerprint of a node-type label."""
    validate_label(label)
    return hash_label(label)


@dataclass(frozen=True)
class FingerprintProfile:
    """Fingerprints of all rooted subtrees of one tree.

    ``per_node`` is the multiset, indexed by post-order position (root last);
    ``fset`` is the deduplicated set used for membership tests. The multiset
    length is the node count, which doubles as the subtree count.
    """

    per_node: tuple[int, ...]
    fset: frozenset[int]

    @property
    def root_fingerprint(self) -> int:
        return self.per_node[-1]


def fingerprint_tree(tree: TypedTree) -> FingerprintProfile:
    """Fingerprint every rooted subtree in a single post-order traversal."""
    fp_of: dict[int, int] = {}
    per_node: list[int] = []
    label_cache: dict[str, int] = {}
    for node in tree.postorder():
        fp = 0
        for c in tree.children[node]:
            fp = mix64((fp + fp_of[c]) & MASK64)
        label = tree.types[node]
        lh = label_cache.get(label)
        if lh is None:
            lh = hash_label(label)
            label_cache[label] = lh
        fp = mix64((fp + lh) & MASK64)
        fp_of[node] = fp
        per_node.append(fp)
    return FingerprintProfile(tuple(per_node), frozenset(per_node))


def subtree_multiset_size(profile: FingerprintProfile) -> int:
    """Number of rooted subtrees, duplicates counted (= node count)."""
    return len(profile.per_node)
