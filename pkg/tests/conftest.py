import itertools

import numpy as np
import pytest

from hopse.lifting import InputGraph, clique_lift, cycle_lift

ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def random_graph(rng, n, p):
    edges = [(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < p]
    return InputGraph.from_edges(n, edges)


def small_corpus(seed=0, count=20, max_vertices=8):
    """Lifted complexes of small random graphs, alternating clique and cycle lifts."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = int(rng.integers(2, max_vertices + 1))
        g = random_graph(rng, n, float(rng.uniform(0.3, 0.8)))
        out.append(clique_lift(g) if i % 2 == 0 else cycle_lift(g))
    return out


def random_adjacency(rng, n, p):
    a = np.triu((rng.random((n, n)) < p).astype(float), 1)
    return a + a.T


def graph_adjacency(g: InputGraph) -> np.ndarray:
    a = np.zeros((g.num_vertices, g.num_vertices))
    for u, v in g.edges:
        a[u, v] = a[v, u] = 1.0
    return a


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def triangle():
    return clique_lift(InputGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)]))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
