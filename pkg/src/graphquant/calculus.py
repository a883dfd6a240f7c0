"""Generalized gradients of the squared alignment distance and of the quantizer loss.

The gradient of ``Y -> d(X, Y)^2`` at a representation ``y`` is taken as
``2 * (y - act(p, x))`` where ``p`` aligns ``x`` optimally to ``y``.  Where
the optimal alignment is unique this is the classical gradient; at ties the
solver's lexicographic tie-break selects one element of the subdifferential.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .alignment import Solver, align_many, as_solver
from .graph import Permutation, act, as_matrix, check_same_shape


@dataclass(frozen=True)
class GeneralizedGradient:
    matrix: np.ndarray
    witness: Permutation
    source: str  # "distance_sq" or "loss"


def sq_distance(y, x, solver: Solver | str | None = None) -> float:
    """``d(X, Y)^2`` evaluated as ``||y - act(p, x)||^2`` at the optimal ``p``."""
    _, sq = align_many(y, as_matrix(x)[None], solver)
    return float(sq[0])


def grad_distance_sq(y, x, solver: Solver | str | None = None) -> GeneralizedGradient:
    """Generalized gradient of ``d(X, .)^2`` at ``y``."""
    y, x = as_matrix(y), as_matrix(x)
    check_same_shape(y, x)
    (p,), _ = align_many(y, x[None], solver)
    return GeneralizedGradient(2.0 * (y - act(p, x)), p, "distance_sq")


def grad_loss(codebook: Sequence[np.ndarray], x, solver: Solver | str | None = None) -> tuple[int, GeneralizedGradient]:
    """Winner index and gradient of ``min_j d(X, Y_j)^2`` with respect to the winner.

    Non-winning code graphs receive the zero gradient.  Ties go to the lowest index.
    """
    if len(codebook) == 0:
        raise ValueError("codebook is empty")
    x = as_matrix(x)
    solver = as_solver(solver)
    best_j, best_sq, best_p = 0, np.inf, None
    for j, y in enumerate(codebook):
        (p,), sq = align_many(y, x[None], solver)
        if sq[0] < best_sq:
            best_j, best_sq, best_p = j, float(sq[0]), p
    y = as_matrix(codebook[best_j])
    return best_j, GeneralizedGradient(2.0 * (y - act(best_p, x)), best_p, "loss")


@dataclass
class FDReport:
    """Outcome of a finite-difference comparison; ``max_deviation`` is NaN-free."""

    max_deviation: float
    deviations: np.ndarray
    unstable_alignment: bool
    step: float
    directions: int = field(default=0)


def fd_check(f: Callable[[np.ndarray], float], y, g: GeneralizedGradient, h: float = 1e-5,
             n_random: int = 8, seed: int = 0,
             witness: Callable[[np.ndarray], Permutation] | None = None) -> FDReport:
    """Compare forward differences ``(f(y + h e) - f(y)) / h`` with ``<g, e>``.

    Directions are every coordinate unit vector plus ``n_random`` random unit
    vectors.  If ``witness`` is given it must return the alignment chosen at a
    point; any change of alignment at ``y +/- h e`` sets ``unstable_alignment``
    and the deviations should not be asserted on.
    """
    if h <= 0:
        raise ValueError("step h must be positive")
    y = as_matrix(y)
    dim = y.size
    rng = np.random.default_rng(seed)
    rand = rng.normal(size=(n_random, dim))
    rand /= np.linalg.norm(rand, axis=1, keepdims=True)
    dirs = np.vstack([np.eye(dim), rand]).reshape((-1,) + y.shape)
    f0 = f(y)
    gflat = np.asarray(g.matrix, dtype=float)
    devs = np.empty(len(dirs))
    unstable = False
    for k, e in enumerate(dirs):
        fd = (f(y + h * e) - f0) / h
        devs[k] = abs(fd - float(np.sum(gflat * e)))
        if witness is not None and not unstable:
            unstable = witness(y + h * e) != g.witness or witness(y - h * e) != g.witness
    return FDReport(float(devs.max()), devs, unstable, h, len(dirs))
