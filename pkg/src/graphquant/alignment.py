"""Pairwise alignments, the optimal alignment kernel, its metric and edit distances.

Every score here is a sum over *all* ordered vertex pairs ``(i, j)``,
diagonal included.  For an undirected graph each common edge is therefore
counted twice; this is what makes the alignment kernel of a permutation equal
to the Frobenius inner product ``<x, act(p, y)>``.

Two solvers share one interface:

* ``exact`` scans all ``n!`` permutations (guarded by the exact limit, default
  8, overridable through ``GQ_EXACT_LIMIT``).  Among optimal permutations the
  lexicographically smallest is returned.
* ``heuristic`` runs seeded greedy construction followed by best-improvement
  pairwise swaps, keeping the best of ``restarts`` runs.  Restart 0 starts
  from the identity.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ExactLimitExceeded, NumericalError
from .graph import Permutation, act, as_matrix, check_permutation, check_same_shape, permutation_table

DEFAULT_EXACT_LIMIT = 8
TIE_RTOL = 1e-12
RADICAND_RTOL = 1e-9


def resolve_exact_limit(limit: int | None = None) -> int:
    if limit is not None:
        return int(limit)
    env = os.environ.get("GQ_EXACT_LIMIT")
    return int(env) if env else DEFAULT_EXACT_LIMIT


@dataclass(frozen=True)
class Solver:
    """Alignment solver choice.  ``restarts`` and ``seed`` only affect ``heuristic``."""

    kind: str = "exact"
    restarts: int = 16
    seed: int = 0
    exact_limit: int | None = None

    def __post_init__(self):
        if self.kind not in ("exact", "heuristic"):
            raise ValueError(f"unknown solver {self.kind!r}; expected 'exact' or 'heuristic'")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


def as_solver(solver: Solver | str | None) -> Solver:
    if solver is None:
        return Solver()
    if isinstance(solver, Solver):
        return solver
    return Solver(kind=str(solver))


@dataclass(frozen=True)
class Alignment:
    perm: Permutation
    value: float
    kind: str  # "kernel" or "edit_cost"


@dataclass(frozen=True)
class AttributeCost:
    """A symmetric attribute distance ``d(a, b)`` evaluated on broadcast ``(..., h)`` arrays."""

    name: str
    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    discontinuous: bool = False

    def __call__(self, a, b) -> np.ndarray:
        return self.func(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def _sqeuclid(a, b):
    return np.sum((a - b) ** 2, axis=-1)


def _euclid(a, b):
    return np.sqrt(_sqeuclid(a, b))


def indel_cost(c: float) -> AttributeCost:
    """Euclidean substitution, constant ``c`` for inserting or deleting an attribute.

    Jumps at the null attribute, so it is flagged discontinuous.
    """
    c = float(c)
    if c < 0:
        raise ValueError("indel cost must be nonnegative")

    def func(a, b):
        za = ~np.any(a != 0, axis=-1)
        zb = ~np.any(b != 0, axis=-1)
        return np.where(za & zb, 0.0, np.where(za ^ zb, c, _euclid(a, b)))

    return AttributeCost(f"indel:{c:g}", func, discontinuous=True)


SQEUCLID = AttributeCost("sqeuclid", _sqeuclid)
EUCLID = AttributeCost("euclid", _euclid)


def parse_cost(spec: str | AttributeCost) -> AttributeCost:
    """Accepts ``sqeuclid``, ``euclid``, ``indel:<c>`` or ``indel(<c>)``."""
    if isinstance(spec, AttributeCost):
        return spec
    spec = spec.strip()
    if spec == "sqeuclid":
        return SQEUCLID
    if spec == "euclid":
        return EUCLID
    m = re.fullmatch(r"indel(?::|\()\s*([^)\s]+)\s*\)?", spec)
    if m:
        return indel_cost(float(m.group(1)))
    raise ValueError(f"unknown attribute cost {spec!r}")


# -- scoring over permutations -------------------------------------------------


def _pair_index(perms: np.ndarray) -> np.ndarray:
    """Row ``r`` lists ``p[i] * n + p[j]`` for all ``(i, j)`` in C order."""
    n = perms.shape[1]
    return (perms[:, :, None] * n + perms[:, None, :]).reshape(len(perms), n * n)


def _values(scores: np.ndarray, perms: np.ndarray) -> np.ndarray:
    """``sum_ij scores[i*n+j, p_i*n+p_j]`` for every row ``p`` of ``perms``.

    Both solvers score permutations only through this function so that equal
    permutations always get bitwise equal values.
    """
    rows = np.arange(scores.shape[0])
    return scores[rows, _pair_index(perms)].sum(axis=1)


def _kernel_scores(x, y):
    n, h = x.shape[0], x.shape[2]
    return x.reshape(n * n, h) @ y.reshape(n * n, h).T


def _cost_scores(x, y, cost: AttributeCost):
    n, h = x.shape[0], x.shape[2]
    return cost(x.reshape(n * n, 1, h), y.reshape(1, n * n, h))


def _tie_tol(values: np.ndarray) -> float:
    return TIE_RTOL * (1.0 + float(np.max(np.abs(values))))


def _check_exact(n: int, limit: int | None) -> None:
    limit = resolve_exact_limit(limit)
    if n > limit:
        raise ExactLimitExceeded(f"exact alignment at order {n} exceeds exact limit {limit}")


def _exact_search(scores: np.ndarray, n: int, sign: float, limit: int | None) -> tuple[Permutation, float]:
    """Scan all permutations maximizing ``sign * value``.

    Returns the lexicographically first permutation within the tie tolerance
    of the optimum, and the optimum itself.
    """
    _check_exact(n, limit)
    table = permutation_table(n)
    vals = np.concatenate([_values(scores, table[s:s + 5040]) for s in range(0, len(table), 5040)])
    signed = sign * vals
    best = signed.max()
    first = int(np.argmax(signed >= best - _tie_tol(vals)))
    return tuple(int(i) for i in table[first]), float(sign * best)


def _greedy(t4: np.ndarray, order: np.ndarray) -> np.ndarray:
    n = t4.shape[0]
    p = np.full(n, -1, dtype=np.intp)
    free = np.ones(n, dtype=bool)
    done = []
    for u in order:
        gain = np.einsum("aa->a", t4[u, u]).copy()
        for v in done:
            gain += t4[u, v, :, p[v]] + t4[v, u, p[v], :]
        gain[~free] = -np.inf
        a = int(np.argmax(gain))
        p[u] = a
        free[a] = False
        done.append(u)
    return p


def _two_opt(t2: np.ndarray, p: np.ndarray) -> tuple[np.ndarray, float]:
    n = len(p)
    cur = float(_values(t2, p[None])[0])
    if n < 2:
        return p, cur
    ii, jj = np.triu_indices(n, k=1)
    rows = np.arange(len(ii))
    while True:
        cand = np.repeat(p[None], len(ii), axis=0)
        cand[rows, ii] = p[jj]
        cand[rows, jj] = p[ii]
        vals = _values(t2, cand)
        best = int(np.argmax(vals))
        if vals[best] <= cur + TIE_RTOL * (1.0 + abs(cur)):
            return p, cur
        p, cur = cand[best], float(vals[best])


def _local_search(scores: np.ndarray, n: int, sign: float, restarts: int, seed: int) -> tuple[Permutation, float]:
    t2 = sign * scores
    t4 = t2.reshape(n, n, n, n)
    best_p, best_v = None, -np.inf
    for r in range(restarts):
        if r == 0:
            start = np.arange(n)
        else:
            rng = np.random.default_rng([seed, r])
            start = _greedy(t4, rng.permutation(n))
        p, v = _two_opt(t2, start)
        if v > best_v:
            best_p, best_v = p, v
    return tuple(int(i) for i in best_p), float(sign * best_v)


# -- public operations -----------------------------------------------------------


def kernel_of_alignment(x, y, p: Sequence[int]) -> float:
    """Alignment kernel ``<x, act(p, y)>``: vertex ``i`` of ``x`` is matched to ``p[i]`` of ``y``."""
    x, y = as_matrix(x), as_matrix(y)
    check_same_shape(x, y)
    p = check_permutation(p, x.shape[0])
    return float(_values(_kernel_scores(x, y), np.array([p]))[0])


def length(x) -> float:
    """Frobenius norm of a representation; identical for every member of the orbit."""
    x = as_matrix(x)
    return float(np.sqrt(np.sum(x * x)))


def heuristic_align(x, y, objective: str = "max_kernel", restarts: int = 16, seed: int = 0,
                    cost: AttributeCost | str = SQEUCLID) -> Alignment:
    """Best alignment found by greedy construction plus swap local search.

    ``objective`` is ``"max_kernel"`` or ``"min_cost"`` (the latter uses ``cost``).
    The returned value is exact for the returned permutation, so it bounds the
    optimum from the correct side.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    x, y = as_matrix(x), as_matrix(y)
    check_same_shape(x, y)
    n = x.shape[0]
    if objective == "max_kernel":
        p, v = _local_search(_kernel_scores(x, y), n, 1.0, restarts, seed)
        return Alignment(p, v, "kernel")
    if objective == "min_cost":
        p, v = _local_search(_cost_scores(x, y, parse_cost(cost)), n, -1.0, restarts, seed)
        return Alignment(p, v, "edit_cost")
    raise ValueError(f"unknown objective {objective!r}")


def optimal_kernel(x, y, solver: Solver | str | None = None) -> Alignment:
    """Maximum of ``<x, act(p, y)>`` over permutations (exact) or a certified lower bound (heuristic)."""
    solver = as_solver(solver)
    x, y = as_matrix(x), as_matrix(y)
    check_same_shape(x, y)
    if solver.kind == "heuristic":
        return heuristic_align(x, y, "max_kernel", solver.restarts, solver.seed)
    p, v = _exact_search(_kernel_scores(x, y), x.shape[0], 1.0, solver.exact_limit)
    return Alignment(p, v, "kernel")


def edit_distance(x, y, cost: AttributeCost | str = SQEUCLID, solver: Solver | str | None = None) -> Alignment:
    """Minimum over permutations of ``sum_ij cost(x[i, j], y[p[i], p[j]])``."""
    solver = as_solver(solver)
    cost = parse_cost(cost)
    x, y = as_matrix(x), as_matrix(y)
    check_same_shape(x, y)
    if solver.kind == "heuristic":
        return heuristic_align(x, y, "min_cost", solver.restarts, solver.seed, cost)
    p, v = _exact_search(_cost_scores(x, y, cost), x.shape[0], -1.0, solver.exact_limit)
    return Alignment(p, v, "edit_cost")


def kernel_metric(x, y, solver: Solver | str | None = None) -> float:
    """Distance induced by the optimal alignment kernel.

    The radicand ``l(x)^2 - 2 k(x, y) + l(y)^2`` is checked for sign, then the
    distance is evaluated as ``||x - act(p, y)||`` at the optimal permutation,
    which is the same quantity without cancellation error.
    """
    x, y = as_matrix(x), as_matrix(y)
    al = optimal_kernel(x, y, solver)
    lx2, ly2 = float(np.sum(x * x)), float(np.sum(y * y))
    radicand = lx2 - 2.0 * al.value + ly2
    if radicand < -RADICAND_RTOL * (lx2 + ly2):
        raise NumericalError(f"negative radicand {radicand!r}: kernel value exceeds Cauchy-Schwarz bound")
    return float(np.sqrt(np.sum((x - act(al.perm, y)) ** 2)))


def align_many(y, xs, solver: Solver | str | None = None) -> tuple[list[Permutation], np.ndarray]:
    """Align every ``x`` in ``xs`` toward the fixed frame of ``y``.

    Returns permutations ``p_i`` maximizing ``<y, act(p_i, x_i)>`` and the
    squared distances ``||y - act(p_i, x_i)||^2``.  The exact path handles all
    samples with one matrix product per chunk, which is what the trainers use.
    """
    solver = as_solver(solver)
    y = as_matrix(y)
    xs = np.asarray(xs, dtype=float)
    if xs.ndim == 3:
        xs = xs[None]
    n = y.shape[0]
    if xs.shape[1:] != y.shape:
        from .errors import DimensionMismatch

        raise DimensionMismatch(f"cannot align samples of shape {xs.shape[1:]} to {y.shape}")
    if solver.kind == "heuristic":
        perms = [optimal_kernel(y, x, solver).perm for x in xs]
    else:
        _check_exact(n, solver.exact_limit)
        table = permutation_table(n)
        inv = np.argsort(table, axis=1)
        # row p holds act(p^-1, y), so <x, row p> = <act(p, x), y>
        frames = y.reshape(n * n, -1)[_pair_index(inv)].reshape(len(table), -1)
        flat = xs.reshape(len(xs), -1)
        perms = []
        step = max(1, 2_000_000 // len(table))
        for s in range(0, len(flat), step):
            vals = flat[s:s + step] @ frames.T
            best = vals.max(axis=1, keepdims=True)
            tol = TIE_RTOL * (1.0 + np.abs(vals).max(axis=1, keepdims=True))
            first = np.argmax(vals >= best - tol, axis=1)
            perms.extend(tuple(int(i) for i in table[f]) for f in first)
    aligned = np.stack([act(p, x) for p, x in zip(perms, xs)]) if len(xs) else xs
    sq = np.sum((aligned - y) ** 2, axis=(1, 2, 3))
    return perms, sq
