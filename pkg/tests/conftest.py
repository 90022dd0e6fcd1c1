import random

import pytest

from castsel.tree import TypedTree


def random_tree(rng: random.Random, max_nodes: int = 60, vocab: int = 8) -> TypedTree:
    """Random ordered tree: each node attaches to a random earlier node."""
    n = rng.randint(1, max_nodes)
    types = [f"T{rng.randrange(vocab)}" for _ in range(n)]
    children: list[list[int]] = [[] for _ in range(n)]
    for i in range(1, n):
        children[rng.randrange(i)].append(i)
    return TypedTree(tuple(types), tuple(tuple(c) for c in children), 0)


@pytest.fixture
def rng():
    return random.Random(12345)
