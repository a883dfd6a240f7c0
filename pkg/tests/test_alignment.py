import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_matrix
from oracles import brute_edit, brute_max_kernel, brute_min_distance
from graphquant.alignment import (EUCLID, SQEUCLID, Solver, align_many, edit_distance, heuristic_align, indel_cost,
                                  kernel_metric, kernel_of_alignment, length, optimal_kernel, parse_cost)
from graphquant.errors import ExactLimitExceeded, NumericalError
from graphquant.graph import act, identity, orbit_equal


def test_kernel_of_alignment_example(example_pair):
    x, y = example_pair
    assert kernel_of_alignment(x, y, (0, 1)) == 7.0
    assert kernel_of_alignment(x, y, (1, 0)) == 8.0
    assert kernel_of_alignment(x, np.zeros_like(y), (1, 0)) == 0.0


def test_optimal_kernel_example(example_pair):
    x, y = example_pair
    al = optimal_kernel(x, y)
    assert al.value == 8.0 and al.perm == (1, 0) and al.kind == "kernel"


def test_optimal_kernel_self_is_identity(rng):
    x = random_matrix(rng, 4, 2)
    al = optimal_kernel(x, x)
    assert al.perm == identity(4)
    assert al.value == pytest.approx(np.sum(x * x), rel=1e-12)


def test_k3_p3_kernel_and_edit(k3_p3):
    k3, p3 = k3_p3
    # brute force over the 6 permutations gives kernel 4 and edit cost 2
    assert optimal_kernel(k3, p3).value == 4.0
    assert edit_distance(k3, p3, SQEUCLID).value == 2.0


def test_length_examples(example_pair):
    x, y = example_pair
    assert length(x) == pytest.approx(math.sqrt(5), abs=1e-12)
    assert length(y) == pytest.approx(math.sqrt(13), abs=1e-12)
    assert length(np.zeros((3, 3, 2))) == 0.0


def test_kernel_metric_example(example_pair, rng):
    x, y = example_pair
    assert kernel_metric(x, y) == pytest.approx(math.sqrt(2), abs=1e-12)
    z = random_matrix(rng, 5, 2)
    assert kernel_metric(z, z) == 0.0
    assert kernel_metric(z, act(tuple(rng.permutation(5)), z)) == 0.0


def test_edit_distance_examples(example_pair, rng):
    x, y = example_pair
    assert edit_distance(x, y, SQEUCLID).value == pytest.approx(2.0, abs=1e-12)
    z = random_matrix(rng, 4, 2)
    for cost in (SQEUCLID, EUCLID, indel_cost(1.0)):
        assert edit_distance(z, z, cost).value == 0.0


def test_exact_limit_guard(rng):
    x = random_matrix(rng, 4, 1)
    for call in (lambda: optimal_kernel(x, x, Solver(exact_limit=3)),
                 lambda: edit_distance(x, x, SQEUCLID, Solver(exact_limit=3)),
                 lambda: align_many(x, [x], Solver(exact_limit=3))):
        with pytest.raises(ExactLimitExceeded):
            call()


def test_default_exact_limit_is_eight(monkeypatch, rng):
    monkeypatch.delenv("GQ_EXACT_LIMIT", raising=False)
    x = random_matrix(rng, 9, 1, density=0.2)
    with pytest.raises(ExactLimitExceeded):
        optimal_kernel(x, x)
    monkeypatch.setenv("GQ_EXACT_LIMIT", "3")
    with pytest.raises(ExactLimitExceeded):
        optimal_kernel(x[:4, :4], x[:4, :4])


def test_order_eight_exact_runs(rng):
    x = random_matrix(rng, 8, 1, density=0.3, symmetric=True)
    p = tuple(rng.permutation(8))
    assert kernel_metric(x, act(p, x)) == pytest.approx(0.0, abs=1e-9)


def test_negative_radicand_is_numerical_error(monkeypatch, example_pair):
    import graphquant.alignment as mod

    x, y = example_pair
    monkeypatch.setattr(mod, "optimal_kernel", lambda *a, **k: mod.Alignment((1, 0), 100.0, "kernel"))
    with pytest.raises(NumericalError):
        mod.kernel_metric(x, y)


def test_parse_cost():
    assert parse_cost("sqeuclid") is SQEUCLID
    assert parse_cost("euclid") is EUCLID
    c = parse_cost("indel:2.5")
    assert c.discontinuous and c([0.0], [0.0]) == 0.0 and c([1.0], [0.0]) == 2.5
    assert parse_cost("indel(2.5)").name == c.name
    with pytest.raises(ValueError):
        parse_cost("manhattan")


@pytest.mark.parametrize("cost", [SQEUCLID, EUCLID, indel_cost(0.7)])
def test_attribute_cost_axioms(cost, rng):
    a, b = rng.normal(size=(2, 5, 3))
    z = np.zeros(3)
    assert np.all(cost(a, a) == 0)
    assert np.allclose(cost(a, b), cost(b, a))
    assert cost(z, z) == 0
    assert np.all(cost(a, b) >= 0)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 5), h=st.integers(1, 3), seed=st.integers(0, 2**32 - 1))
def test_against_brute_force(n, h, seed):
    rng = np.random.default_rng(seed)
    x, y = random_matrix(rng, n, h), random_matrix(rng, n, h)
    d_brute, _ = brute_min_distance(x, y)
    assert abs(kernel_metric(x, y) - d_brute) <= 1e-9
    assert abs(optimal_kernel(x, y).value - brute_max_kernel(x, y)) <= 1e-9 * (1 + abs(brute_max_kernel(x, y)))
    for cost in (SQEUCLID, EUCLID, indel_cost(0.5)):
        ref = brute_edit(x, y, cost)
        assert abs(edit_distance(x, y, cost).value - ref) <= 1e-9 * (1 + ref)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 5), h=st.integers(1, 3), seed=st.integers(0, 2**32 - 1))
def test_orbit_invariance(n, h, seed):
    rng = np.random.default_rng(seed)
    x, y = random_matrix(rng, n, h), random_matrix(rng, n, h)
    p, q = tuple(rng.permutation(n)), tuple(rng.permutation(n))
    xp, yq = act(p, x), act(q, y)
    assert abs(optimal_kernel(xp, yq).value - optimal_kernel(x, y).value) <= 1e-12 * (1 + abs(optimal_kernel(x, y).value))
    assert abs(kernel_metric(xp, yq) - kernel_metric(x, y)) <= 1e-12 * (1 + kernel_metric(x, y))
    assert abs(length(xp) - length(x)) <= 1e-12 * (1 + length(x))
    e = edit_distance(x, y, EUCLID).value
    assert abs(edit_distance(xp, yq, EUCLID).value - e) <= 1e-12 * (1 + e)


def test_perm_attains_reported_value(rng):
    for _ in range(30):
        x, y = random_matrix(rng, 5, 2), random_matrix(rng, 5, 2)
        al = optimal_kernel(x, y)
        assert abs(kernel_of_alignment(x, y, al.perm) - al.value) <= 1e-12 * (1 + abs(al.value))


def test_heuristic_bounds_and_restarts(rng):
    for _ in range(40):
        n = int(rng.integers(2, 7))
        x, y = random_matrix(rng, n, 2), random_matrix(rng, n, 2)
        exact_k = optimal_kernel(x, y).value
        h1 = optimal_kernel(x, y, Solver("heuristic", restarts=1, seed=3)).value
        h16 = optimal_kernel(x, y, Solver("heuristic", restarts=16, seed=3)).value
        assert h1 <= h16 <= exact_k
        assert edit_distance(x, y, EUCLID, Solver("heuristic", seed=3)).value >= edit_distance(x, y, EUCLID).value


def test_heuristic_self_alignment(rng):
    x = random_matrix(rng, 10, 2)
    al = heuristic_align(x, x, "max_kernel", restarts=1)
    assert al.value == pytest.approx(np.sum(x * x), rel=1e-12)


def test_heuristic_deterministic(rng):
    x, y = random_matrix(rng, 12, 2), random_matrix(rng, 12, 2)
    a = heuristic_align(x, y, "min_cost", restarts=4, seed=9, cost=EUCLID)
    b = heuristic_align(x, y, "min_cost", restarts=4, seed=9, cost=EUCLID)
    assert a == b


def test_heuristic_rejects_zero_restarts(example_pair):
    with pytest.raises(ValueError):
        heuristic_align(*example_pair, restarts=0)


def test_lexicographic_tie_break():
    # every permutation of the zero graph is optimal; the identity is lexicographically first
    z = np.zeros((4, 4, 1))
    assert optimal_kernel(z, z).perm == identity(4)
    # two automorphic optima for a symmetric path: (0,1,2) and (2,1,0)
    p3 = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0.0]])
    assert optimal_kernel(p3, p3).perm == (0, 1, 2)
    assert optimal_kernel(p3, act((2, 1, 0), p3)).perm == (0, 1, 2)


def test_align_many_matches_single_pair_solver(rng):
    y = random_matrix(rng, 5, 2)
    xs = np.stack([random_matrix(rng, 5, 2) for _ in range(20)])
    perms, sq = align_many(y, xs)
    for x, p, s in zip(xs, perms, sq):
        al = optimal_kernel(y, x)
        assert p == al.perm
        assert s == pytest.approx(kernel_metric(y, x) ** 2, rel=1e-9, abs=1e-12)


def test_padding_invariance_nonnegative_attributes(rng):
    """Extra null vertices never help when all attributes are nonnegative."""
    for _ in range(40):
        n = int(rng.integers(1, 5))
        x, y = np.abs(random_matrix(rng, n, 2)), np.abs(random_matrix(rng, n, 2))
        pad = ((0, 1), (0, 1), (0, 0))
        xp, yp = np.pad(x, pad), np.pad(y, pad)
        assert kernel_metric(xp, yp) == pytest.approx(kernel_metric(x, y), abs=1e-9)
        assert edit_distance(xp, yp, EUCLID).value == pytest.approx(edit_distance(x, y, EUCLID).value, abs=1e-9)


def test_padding_can_lower_distance_with_signed_attributes():
    x, y = np.array([[[1.0]]]), np.array([[[-1.0]]])
    pad = ((0, 1), (0, 1), (0, 0))
    assert kernel_metric(x, y) == 2.0
    assert kernel_metric(np.pad(x, pad), np.pad(y, pad)) == pytest.approx(math.sqrt(2))


def test_zero_distance_iff_same_orbit(rng):
    x = random_matrix(rng, 4, 1)
    y = act((3, 1, 0, 2), x)
    assert kernel_metric(x, y) == 0.0 and orbit_equal(x, y)
    z = x.copy()
    z[0, 0, 0] += 0.5
    assert kernel_metric(x, z) > 0 and not orbit_equal(x, z)
