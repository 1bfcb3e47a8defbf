import itertools
import random

import pytest

from entroll.graphstate import Graph


def random_graph(n: int, rng: random.Random, density: float = 0.5) -> Graph:
    g = Graph.empty(n)
    for u, w in itertools.combinations(range(n), 2):
        if rng.random() < density:
            g.add_edge(u, w)
    return g


def assert_adjacency_invariants(g: Graph) -> None:
    for v in g.vertices():
        assert not g.has_edge(v, v)
        for u in g.neighbors(v):
            assert g.has_edge(u, v)
            assert g.is_live(u)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240817)
