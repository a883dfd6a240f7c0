import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_matrix
from graphquant.errors import DimensionMismatch, ExactLimitExceeded, InvalidEdge, OrderExceedsBound
from graphquant.graph import (AttributedGraph, act, compose, embed, extract, identity, inverse, orbit_equal,
                              permutation_table)


def test_embed_diagonal_graph():
    g = AttributedGraph([1.0, 2.0])
    assert np.array_equal(embed(g, 2)[:, :, 0], np.diag([1.0, 2.0]))
    assert np.array_equal(embed(g, 3)[:, :, 0], np.diag([1.0, 2.0, 0.0]))


def test_embed_triangle(k3_p3):
    k3, _ = k3_p3
    assert np.array_equal(k3[:, :, 0], np.ones((3, 3)) - np.eye(3))


def test_embed_order_bound():
    with pytest.raises(OrderExceedsBound):
        embed(AttributedGraph([1.0, 2.0, 3.0]), 2)


def test_zero_edge_rejected():
    with pytest.raises(InvalidEdge):
        AttributedGraph([1.0, 2.0], {(0, 1): [0.0]})


def test_self_loop_and_out_of_range_edges_rejected():
    with pytest.raises(InvalidEdge):
        AttributedGraph([1.0, 2.0], {(0, 0): [1.0]})
    with pytest.raises(InvalidEdge):
        AttributedGraph([1.0, 2.0], {(0, 2): [1.0]})


def test_edge_dimension_checked():
    with pytest.raises(DimensionMismatch):
        AttributedGraph([[1.0, 0.0], [0.0, 1.0]], {(0, 1): [1.0]})


def test_undirected_requires_symmetry():
    with pytest.raises(InvalidEdge):
        AttributedGraph([1.0, 2.0], {(0, 1): [1.0]}, undirected=True)
    g = AttributedGraph.from_edges([1.0, 2.0], [(0, 1, 3.0)], undirected=True)
    x = embed(g, 4)
    assert np.array_equal(x, x.transpose(1, 0, 2))


def test_swap_acts_on_example():
    x = np.diag([1.0, 2.0])
    assert np.array_equal(act((1, 0), x)[:, :, 0], np.diag([2.0, 1.0]))
    assert np.array_equal(act((1, 0), act((1, 0), x)), act(identity(2), x))


def test_act_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        act((0, 1, 2), np.zeros((2, 2, 1)))


def test_permutation_table_is_lexicographic():
    t = permutation_table(4)
    assert len(t) == 24
    assert [tuple(r) for r in t] == sorted(tuple(r) for r in t)


@settings(max_examples=200, deadline=None)
@given(n=st.integers(1, 6), h=st.integers(1, 3), seed=st.integers(0, 2**32 - 1))
def test_group_action_laws(n, h, seed):
    rng = np.random.default_rng(seed)
    x = random_matrix(rng, n, h)
    y = random_matrix(rng, n, h)
    p = tuple(rng.permutation(n))
    q = tuple(rng.permutation(n))
    assert np.array_equal(act(identity(n), x), x)
    assert np.array_equal(act(compose(p, q), x), act(q, act(p, x)))
    assert np.array_equal(act(inverse(p), act(p, x)), x)
    lhs = np.linalg.norm(act(p, x) - act(p, y))
    assert abs(lhs - np.linalg.norm(x - y)) <= 1e-12 * max(1.0, lhs)


@settings(max_examples=100, deadline=None)
@given(n=st.integers(1, 5), h=st.integers(1, 3), seed=st.integers(0, 2**32 - 1))
def test_extract_round_trip(n, h, seed):
    rng = np.random.default_rng(seed)
    x = random_matrix(rng, n, h)
    pad = n + 1
    xp = embed(extract(x), pad)
    assert orbit_equal(xp, np.pad(x, ((0, 1), (0, 1), (0, 0))))
    m = extract(x).order
    assert not np.any(xp[m:]) and not np.any(xp[:, m:])


def test_extract_keeps_zero_attribute_vertices_with_edges(k3_p3):
    k3, _ = k3_p3
    g = extract(k3)
    assert g.order == 3 and g.undirected and len(g.edge_attrs) == 6


def test_orbit_equal_examples(rng):
    x = np.diag([1.0, 2.0])
    assert orbit_equal(x, np.diag([2.0, 1.0]))
    assert not orbit_equal(x, np.diag([1.0, 3.0]))
    y = random_matrix(rng, 5, 2)
    assert orbit_equal(y, act(tuple(rng.permutation(5)), y))
    z = y.copy()
    z[0, 1, 0] += 1e-9
    assert not orbit_equal(y, z)


def test_orbit_equal_exact_limit(rng):
    x = random_matrix(rng, 4, 1)
    with pytest.raises(ExactLimitExceeded):
        orbit_equal(x, x, exact_limit=3)


def test_orbit_equal_reads_env_limit(monkeypatch, rng):
    monkeypatch.setenv("GQ_EXACT_LIMIT", "2")
    x = random_matrix(rng, 3, 1)
    with pytest.raises(ExactLimitExceeded):
        orbit_equal(x, x)
