import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from graphquant.graph import AttributedGraph, embed  # noqa: E402


def random_matrix(rng, n, h, density=0.6, symmetric=False):
    """Random representation matrix of a graph with about ``density`` of its edges present."""
    x = rng.normal(size=(n, n, h))
    mask = rng.random((n, n)) < density
    np.fill_diagonal(mask, True)
    if symmetric:
        mask = np.triu(mask) | np.triu(mask).T
        x = (x + x.transpose(1, 0, 2)) / 2
    return np.where(mask[:, :, None], x, 0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def example_pair():
    """The two-vertex scalar graphs with representations diag(1, 2) and diag(3, 2)."""
    return np.diag([1.0, 2.0])[:, :, None], np.diag([3.0, 2.0])[:, :, None]


@pytest.fixture
def k3_p3():
    k3 = AttributedGraph.from_edges([0, 0, 0], [(0, 1, 1), (1, 2, 1), (0, 2, 1)], undirected=True)
    p3 = AttributedGraph.from_edges([0, 0, 0], [(0, 1, 1), (1, 2, 1)], undirected=True)
    return embed(k3), embed(p3)


def two_prototypes():
    a = AttributedGraph.from_edges([[1.0, 0.0]] * 5, [(i, i + 1, [1.0, 1.0]) for i in range(4)], undirected=True)
    b = AttributedGraph.from_edges([[1.0, 1.0]] + [[0.0, 1.0]] * 4, [(0, i, [1.0, 1.0]) for i in range(1, 5)],
                                   undirected=True)
    return a, b


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] AC{number:02d} {title}" + (f": {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
