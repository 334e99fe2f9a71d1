import itertools

import pytest
from hypothesis import strategies as st

from crossworld import fixtures
from crossworld.graph import CausalGraph, NodeKind


@pytest.fixture(scope="session")
def fig():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = fixtures.load(name)
        return cache[name]

    return get


@st.composite
def dags(draw, max_nodes=10):
    """Random DAG whose node order is a topological order."""
    n = draw(st.integers(2, max_nodes))
    names = [f"N{i}" for i in range(n)]
    pairs = list(itertools.combinations(range(n), 2))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = [(names[i], names[j]) for (i, j), k in zip(pairs, keep) if k]
    return CausalGraph(tuple((v, NodeKind.ENDOGENOUS) for v in names), tuple(edges))


@st.composite
def queries(draw, g):
    names = list(g.names)
    a, b = draw(st.lists(st.sampled_from(names), min_size=2, max_size=2, unique=True))
    rest = [v for v in names if v not in (a, b)]
    cond = draw(st.lists(st.sampled_from(rest), unique=True, max_size=len(rest))) if rest else []
    return a, b, cond


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
