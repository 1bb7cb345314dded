import random

import pytest

from digraph import build_digraph, generate


@pytest.fixture
def back_arc_graph():
    """0 -> 1 -> 2 <-> 3, the smallest graph where splicing a shortcut needs care."""
    return build_digraph(4, [(0, 1), (1, 2), (2, 3), (3, 2)])


@pytest.fixture
def random_graphs():
    """Factory for seeded random digraphs with mixed densities."""
    def _make(count, max_n=32, seed=0, max_density=3):
        rng = random.Random(seed)
        graphs = []
        for _ in range(count):
            n = rng.randint(1, max_n)
            m = rng.randint(0, min(n * (n - 1), max_density * n))
            graphs.append(generate("random", n, m=m, seed=rng.randrange(2 ** 31)))
        return graphs
    return _make
