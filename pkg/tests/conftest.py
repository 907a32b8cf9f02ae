import warnings

import numpy as np
import pytest
from hypothesis import strategies as st

from qswitch.model import Topology, figure1_topology


@pytest.fixture
def fig1():
    return figure1_topology()


def random_topology(rng: np.random.Generator, max_links=6, max_types=10, min_prob=0.0) -> Topology:
    K = int(rng.integers(1, max_links + 1))
    M = int(rng.integers(1, max_types + 1))
    type_links = []
    for _ in range(M):
        size = int(rng.integers(1, K + 1))
        type_links.append(tuple(rng.choice(K, size=size, replace=False).tolist()))
    p = rng.uniform(min_prob, 1.0, size=K)
    q = rng.uniform(min_prob, 1.0, size=M)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return Topology(tuple(p), tuple(q), tuple(type_links))


@st.composite
def topologies(draw, max_links=5, max_types=7):
    K = draw(st.integers(1, max_links))
    M = draw(st.integers(1, max_types))
    links = st.sets(st.integers(0, K - 1), min_size=1).map(lambda s: tuple(sorted(s)))
    type_links = draw(st.lists(links, min_size=M, max_size=M))
    prob = st.floats(0.05, 1.0)
    p = draw(st.lists(prob, min_size=K, max_size=K))
    q = draw(st.lists(prob, min_size=M, max_size=M))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return Topology(tuple(p), tuple(q), tuple(type_links))


# acceptance results, filled in by tests/test_acceptance.py
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda n: int(n.split()[0])):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
