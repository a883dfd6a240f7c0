"""Attributed graphs, their representation matrices and the vertex permutation action.

A graph of order ``m`` with ``h``-dimensional attributes is stored as a dense
``(n, n, h)`` float array once embedded at order bound ``n >= m``: the diagonal
holds vertex attributes, off-diagonal cells hold edge attributes, and every
cell touching a padded vertex is the zero vector (the null attribute).

Permutations are tuples of 0-based indices.  The action is

    act(p, x)[i, j] = x[p[i], p[j]]

and composition is ordinary function composition, ``compose(p, q)[i] = p[q[i]]``.
With these conventions ``act(compose(p, q), x) == act(q, act(p, x))``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, ExactLimitExceeded, InvalidEdge, OrderExceedsBound

Permutation = tuple[int, ...]


@dataclass(frozen=True)
class AttributedGraph:
    """A finite graph whose vertices and edges carry real feature vectors.

    ``vertex_attrs`` has shape ``(m, h)``.  ``edge_attrs`` maps ordered pairs
    ``(i, j)`` with ``i != j`` (0-based) to length-``h`` vectors; zero vectors
    are not edges and are rejected.
    """

    vertex_attrs: np.ndarray
    edge_attrs: Mapping[tuple[int, int], np.ndarray] = field(default_factory=dict)
    undirected: bool = False

    def __post_init__(self):
        va = np.array(self.vertex_attrs, dtype=float)
        if va.ndim == 1:
            va = va[:, None]
        if va.ndim != 2 or va.shape[0] < 1:
            raise DimensionMismatch(f"vertex_attrs must be (m, h) with m >= 1, got shape {va.shape}")
        m, h = va.shape
        edges = {}
        for (i, j), a in self.edge_attrs.items():
            i, j = int(i), int(j)
            if i == j or not (0 <= i < m and 0 <= j < m):
                raise InvalidEdge(f"edge ({i}, {j}) invalid for a graph of order {m}")
            a = np.atleast_1d(np.array(a, dtype=float))
            if a.shape != (h,):
                raise DimensionMismatch(f"edge ({i}, {j}) has dimension {a.shape}, expected ({h},)")
            if not np.any(a):
                raise InvalidEdge(f"edge ({i}, {j}) carries the null attribute")
            a.flags.writeable = False
            edges[(i, j)] = a
        if self.undirected:
            for (i, j), a in edges.items():
                b = edges.get((j, i))
                if b is None or not np.array_equal(a, b):
                    raise InvalidEdge(f"undirected graph has asymmetric edge ({i}, {j})")
        va.flags.writeable = False
        object.__setattr__(self, "vertex_attrs", va)
        object.__setattr__(self, "edge_attrs", dict(sorted(edges.items())))

    @classmethod
    def from_edges(cls, vertex_attrs, edges: Iterable[tuple[int, int, object]] = (), undirected: bool = False):
        """Build a graph from ``(i, j, attr)`` triples, mirroring them if ``undirected``."""
        attrs = {}
        for i, j, a in edges:
            attrs[(i, j)] = a
            if undirected:
                attrs[(j, i)] = a
        return cls(vertex_attrs, attrs, undirected=undirected)

    @property
    def order(self) -> int:
        return self.vertex_attrs.shape[0]

    @property
    def dim(self) -> int:
        return self.vertex_attrs.shape[1]

    def __eq__(self, other):
        if not isinstance(other, AttributedGraph):
            return NotImplemented
        return (
            self.undirected == other.undirected
            and np.array_equal(self.vertex_attrs, other.vertex_attrs)
            and self.edge_attrs.keys() == other.edge_attrs.keys()
            and all(np.array_equal(a, other.edge_attrs[e]) for e, a in self.edge_attrs.items())
        )

    __hash__ = None


def embed(g: AttributedGraph, n: int | None = None) -> np.ndarray:
    """Return the ``(n, n, h)`` representation matrix of ``g`` padded to order ``n``."""
    if n is None:
        n = g.order
    if g.order > n:
        raise OrderExceedsBound(f"graph of order {g.order} exceeds order bound {n}")
    x = np.zeros((n, n, g.dim))
    idx = np.arange(g.order)
    x[idx, idx] = g.vertex_attrs
    for (i, j), a in g.edge_attrs.items():
        x[i, j] = a
    return x


def extract(x: np.ndarray, undirected: bool | None = None) -> AttributedGraph:
    """Recover a graph from a representation matrix.

    Vertices with a null attribute and no incident edges are dropped, since
    they cannot be told apart from padding.  At least one vertex is kept.
    """
    x = as_matrix(x)
    n = x.shape[0]
    nonzero = np.any(x != 0, axis=2)
    off = nonzero & ~np.eye(n, dtype=bool)
    keep = np.flatnonzero(np.diag(nonzero) | off.any(axis=0) | off.any(axis=1))
    if keep.size == 0:
        keep = np.array([0])
    remap = {int(v): k for k, v in enumerate(keep)}
    edges = {(remap[i], remap[j]): x[i, j] for i, j in zip(*np.nonzero(off))}
    if undirected is None:
        undirected = bool(np.array_equal(x, x.transpose(1, 0, 2)))
    return AttributedGraph(x[keep, keep], edges, undirected=undirected)


def as_matrix(x) -> np.ndarray:
    """Coerce to a float ``(n, n, h)`` array; 2-D input is read as ``h = 1``."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 2:
        x = x[:, :, None]
    if x.ndim != 3 or x.shape[0] != x.shape[1]:
        raise DimensionMismatch(f"expected an (n, n, h) representation matrix, got shape {x.shape}")
    return x


def check_same_shape(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape != y.shape:
        raise DimensionMismatch(f"representation shapes differ: {x.shape} vs {y.shape}")


def identity(n: int) -> Permutation:
    return tuple(range(n))


def check_permutation(p: Sequence[int], n: int | None = None) -> Permutation:
    p = tuple(int(i) for i in p)
    if sorted(p) != list(range(len(p))):
        raise ValueError(f"not a permutation: {p}")
    if n is not None and len(p) != n:
        raise DimensionMismatch(f"permutation of size {len(p)} used at order {n}")
    return p


def compose(p: Sequence[int], q: Sequence[int]) -> Permutation:
    """``(p o q)(i) = p(q(i))``."""
    return tuple(int(p[i]) for i in q)


def inverse(p: Sequence[int]) -> Permutation:
    inv = [0] * len(p)
    for i, pi in enumerate(p):
        inv[pi] = i
    return tuple(inv)


def act(p: Sequence[int], x: np.ndarray) -> np.ndarray:
    """Simultaneously reorder rows and columns: ``result[i, j] = x[p[i], p[j]]``."""
    x = as_matrix(x)
    p = np.asarray(p, dtype=np.intp)
    if p.shape != (x.shape[0],):
        raise DimensionMismatch(f"permutation of size {p.size} applied at order {x.shape[0]}")
    return x[np.ix_(p, p)]


def random_permutation(n: int, rng: np.random.Generator) -> Permutation:
    return tuple(int(i) for i in rng.permutation(n))


@lru_cache(maxsize=16)
def permutation_table(n: int) -> np.ndarray:
    """All permutations of ``range(n)`` in lexicographic order, shape ``(n!, n)``."""
    table = np.array(list(itertools.permutations(range(n))), dtype=np.intp).reshape(-1, n)
    table.flags.writeable = False
    return table


def orbit_equal(x: np.ndarray, y: np.ndarray, exact_limit: int | None = None) -> bool:
    """True iff some vertex permutation maps ``x`` onto ``y`` exactly."""
    from .alignment import resolve_exact_limit

    x, y = as_matrix(x), as_matrix(y)
    if x.shape != y.shape:
        return False
    n = x.shape[0]
    limit = resolve_exact_limit(exact_limit)
    if n > limit:
        raise ExactLimitExceeded(f"orbit test at order {n} exceeds exact limit {limit}")
    # cheap invariants first: multisets of diagonal and of all cells
    if not np.array_equal(_sorted_rows(np.diagonal(x).T), _sorted_rows(np.diagonal(y).T)):
        return False
    if not np.array_equal(_sorted_rows(x.reshape(-1, x.shape[2])), _sorted_rows(y.reshape(-1, y.shape[2]))):
        return False
    yf = y.reshape(n * n, -1)
    for p in _chunks(permutation_table(n)):
        idx = (p[:, :, None] * n + p[:, None, :]).reshape(len(p), -1)
        hits = np.all(x.reshape(n * n, -1)[idx] == yf, axis=(1, 2))
        if hits.any():
            return True
    return False


def _sorted_rows(a: np.ndarray) -> np.ndarray:
    return a[np.lexsort(a.T[::-1])] if a.size else a


def _chunks(table: np.ndarray, size: int = 5040):
    for start in range(0, len(table), size):
        yield table[start:start + size]
