"""Graph quantizers: codebooks, nearest-neighbor encoding, trainers and Lloyd-Max audits.

Distortions are named by strings:

``sq_metric``
    squared distance induced by the optimal alignment kernel (training default)
``metric``
    the distance itself; evaluation only
``edit:<cost>``
    edit distance with an attribute cost such as ``edit:euclid`` or ``edit:indel:1``

The k-means trainer aligns every sample toward the current frame of its code
graph and averages the aligned representations.  The stochastic generalized
gradient (SGG) trainer moves only the winning code graph,
``y <- y + eta_t * (act(p, x) - y)`` with ``eta_t = a / (b + t)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .alignment import Alignment, AttributeCost, Solver, align_many, as_solver, edit_distance, parse_cost, resolve_exact_limit
from .errors import DimensionMismatch, DiscontinuousDistortion, InsufficientData, NumericalError
from .graph import Permutation, act, as_matrix, orbit_equal

Progress = Callable[[int, float], None]


@dataclass(frozen=True)
class Distortion:
    kind: str
    cost: AttributeCost | None = None

    @classmethod
    def parse(cls, spec: "Distortion | str") -> "Distortion":
        if isinstance(spec, Distortion):
            return spec
        spec = spec.strip()
        if spec in ("sq_metric", "metric"):
            return cls(spec)
        if spec.startswith("edit:") or spec.startswith("edit("):
            inner = spec[5:-1] if spec.startswith("edit(") else spec[5:]
            return cls("edit", parse_cost(inner))
        raise ValueError(f"unknown distortion {spec!r}")

    @property
    def name(self) -> str:
        return f"edit:{self.cost.name}" if self.kind == "edit" else self.kind

    @property
    def discontinuous(self) -> bool:
        return self.cost is not None and self.cost.discontinuous


@dataclass
class Codebook:
    code_graphs: list[np.ndarray]
    distortion: str = "sq_metric"
    provenance: dict = field(default_factory=dict)
    distortion_history: list[float] = field(default_factory=list)

    def __post_init__(self):
        self.code_graphs = [as_matrix(y).copy() for y in self.code_graphs]
        if not self.code_graphs:
            raise ValueError("a codebook needs at least one code graph")
        shapes = {y.shape for y in self.code_graphs}
        if len(shapes) != 1:
            raise DimensionMismatch(f"code graphs have differing shapes {sorted(shapes)}")
        self.distortion = Distortion.parse(self.distortion).name

    @property
    def k(self) -> int:
        return len(self.code_graphs)

    @property
    def order(self) -> int:
        return self.code_graphs[0].shape[0]

    @property
    def dim(self) -> int:
        return self.code_graphs[0].shape[2]


@dataclass(frozen=True)
class EncodeResult:
    index: int
    distortion: float
    alignment: Alignment


@dataclass
class DistortionReport:
    mean: float
    counts: np.ndarray
    conditional_means: np.ndarray
    N: int
    indices: np.ndarray
    distortions: np.ndarray


@dataclass(frozen=True)
class Schedule:
    """Step sizes ``eta_t = a / (b + t)`` for ``t = 1, 2, ...``."""

    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("schedule needs a > 0")
        if not self.b >= 0:
            raise ValueError("schedule needs b >= 0")

    def rate(self, t: int) -> float:
        return self.a / (self.b + t)

    def satisfies_a1(self) -> bool:
        # a/(b+t) with a > 0, b >= 0: positive, vanishing, harmonic sum diverges, sum of squares converges
        return self.a > 0 and self.b >= 0

    @classmethod
    def parse(cls, text: str) -> "Schedule":
        a, _, b = text.partition(":")
        return cls(float(a), float(b) if b else 1.0)


@dataclass(frozen=True)
class TrainerConfig:
    k: int = 2
    distortion: str = "sq_metric"
    solver: Solver = Solver()
    init: str = "sample_k_distinct"
    seed: int = 0
    max_iters: int = 100
    rel_tol: float = 1e-6
    epochs: int = 50
    schedule: Schedule = Schedule()
    allow_discontinuous: bool = False
    grad_cap: float = 1e6

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if self.init not in ("sample_k_distinct", "provided"):
            raise ValueError(f"unknown init {self.init!r}")
        if self.max_iters < 1 or self.epochs < 0:
            raise ValueError("max_iters must be >= 1 and epochs >= 0")
        object.__setattr__(self, "solver", as_solver(self.solver))
        Distortion.parse(self.distortion)


# -- encoding --------------------------------------------------------------------


def _stack(data) -> np.ndarray:
    xs = np.stack([as_matrix(x) for x in data]) if len(data) else np.empty((0, 0, 0, 0))
    return xs


def _pair_table(codes: Sequence[np.ndarray], xs: np.ndarray, distortion: Distortion,
                solver: Solver) -> tuple[np.ndarray, list[list[Permutation]]]:
    """Distortions ``D[i, j]`` of sample ``i`` to code ``j`` and the aligning permutations."""
    N, k = len(xs), len(codes)
    D = np.empty((N, k))
    perms: list[list[Permutation]] = [[None] * k for _ in range(N)]
    for j, y in enumerate(codes):
        if distortion.kind == "edit":
            for i, x in enumerate(xs):
                al = edit_distance(y, x, distortion.cost, solver)
                D[i, j] = al.value
                perms[i][j] = al.perm
        else:
            ps, sq = align_many(y, xs, solver)
            D[:, j] = np.sqrt(sq) if distortion.kind == "metric" else sq
            for i, p in enumerate(ps):
                perms[i][j] = p
    return D, perms


def distortion_table(cb: Codebook, data, solver: Solver | str | None = None,
                     distortion: str | None = None) -> np.ndarray:
    """All sample-to-code distortions as an ``(N, k)`` array."""
    dist = Distortion.parse(distortion or cb.distortion)
    return _pair_table(cb.code_graphs, _stack(data), dist, as_solver(solver))[0]


def encode(cb: Codebook, x, solver: Solver | str | None = None, distortion: str | None = None) -> EncodeResult:
    """Nearest code graph to ``x``; ties go to the lowest index."""
    dist = Distortion.parse(distortion or cb.distortion)
    x = as_matrix(x)
    D, perms = _pair_table(cb.code_graphs, x[None], dist, as_solver(solver))
    j = int(np.argmin(D[0]))
    p = perms[0][j]
    if dist.kind == "edit":
        al = Alignment(p, float(D[0, j]), "edit_cost")
    else:
        al = Alignment(p, float(np.sum(cb.code_graphs[j] * act(p, x))), "kernel")
    return EncodeResult(j, float(D[0, j]), al)


def empirical_distortion(cb: Codebook, data, solver: Solver | str | None = None,
                         distortion: str | None = None) -> DistortionReport:
    """Mean nearest-neighbor distortion of ``data`` with per-region statistics."""
    if len(data) == 0:
        raise InsufficientData("empirical distortion needs at least one sample")
    D = distortion_table(cb, data, solver, distortion)
    return _report(D)


def _report(D: np.ndarray) -> DistortionReport:
    N, k = D.shape
    idx = np.argmin(D, axis=1)
    d = D[np.arange(N), idx]
    counts = np.bincount(idx, minlength=k)
    sums = np.bincount(idx, weights=d, minlength=k)
    cond = np.divide(sums, counts, out=np.full(k, np.nan), where=counts > 0)
    return DistortionReport(float(np.mean(d)), counts, cond, N, idx, d)


# -- training ----------------------------------------------------------------------


def _check_trainable(config: TrainerConfig) -> Distortion:
    dist = Distortion.parse(config.distortion)
    if dist.kind == "metric":
        raise ValueError("the plain metric is for evaluation only; train with sq_metric")
    if dist.discontinuous:
        if not config.allow_discontinuous:
            raise DiscontinuousDistortion(
                f"cost {dist.cost.name} is discontinuous; minimizing its empirical distortion is not a "
                "consistent estimator. Pass allow_discontinuous to train anyway")
        warnings.warn(f"training with discontinuous cost {dist.cost.name}: empirical minimizers may be "
                      "statistically inconsistent", RuntimeWarning, stacklevel=3)
    return dist


def sample_k_distinct(xs: np.ndarray, k: int, rng: np.random.Generator,
                      exact_limit: int | None = None) -> list[np.ndarray]:
    """Pick ``k`` samples in seeded random order, skipping orbit duplicates.

    Falls back to duplicates only when the data has fewer than ``k`` distinct graphs.
    """
    order = rng.permutation(len(xs))
    limit = resolve_exact_limit(exact_limit)
    exact = xs.shape[1] <= limit
    chosen: list[int] = []
    for i in order:
        if len(chosen) == k:
            break
        same = orbit_equal if exact else (lambda a, b, exact_limit=None: np.array_equal(a, b))
        if not any(same(xs[i], xs[c], exact_limit=limit) for c in chosen):
            chosen.append(int(i))
    for i in order:
        if len(chosen) == k:
            break
        if int(i) not in chosen:
            chosen.append(int(i))
    return [xs[i].copy() for i in chosen]


def _initial_codes(xs, config, init_codebook, rng):
    if config.init == "provided" or init_codebook is not None:
        if init_codebook is None:
            raise ValueError("init='provided' needs an initial codebook")
        codes = [as_matrix(y).copy() for y in getattr(init_codebook, "code_graphs", init_codebook)]
        if len(codes) != config.k:
            raise ValueError(f"initial codebook has {len(codes)} code graphs, config says k={config.k}")
        return codes
    return sample_k_distinct(xs, config.k, rng, config.solver.exact_limit)


def _prepare(data, config):
    xs = _stack(data)
    if len(xs) < config.k:
        raise InsufficientData(f"need at least k={config.k} samples, got {len(xs)}")
    if len({x.shape for x in xs}) > 1:
        raise DimensionMismatch("training samples must share order and attribute dimension")
    return xs


def kmeans_fit(data, config: TrainerConfig, init_codebook=None, progress: Progress | None = None) -> Codebook:
    """Lloyd iterations on optimally aligned representations.

    ``distortion_history[t]`` is the empirical distortion of the ``t``-th
    codebook; the returned codebook is the last one evaluated.
    """
    dist = _check_trainable(config)
    xs = _prepare(data, config)
    rng = np.random.default_rng(config.seed)
    codes = _initial_codes(xs, config, init_codebook, rng)
    history: list[float] = []
    converged = False
    it = 0
    for it in range(1, config.max_iters + 1):
        D, perms = _pair_table(codes, xs, dist, config.solver)
        labels = np.argmin(D, axis=1)
        d = D[np.arange(len(xs)), labels]
        history.append(float(np.mean(d)))
        if progress is not None:
            progress(it, history[-1])
        if history[-1] == 0.0 or (len(history) > 1 and history[-2] - history[-1] < config.rel_tol * history[-2]):
            converged = True
            break
        if it == config.max_iters:
            break
        new = []
        for j in range(len(codes)):
            members = np.flatnonzero(labels == j)
            if members.size:
                new.append(np.mean(np.stack([act(perms[i][j], xs[i]) for i in members]), axis=0))
            else:
                new.append(None)
        empty = [j for j, y in enumerate(new) if y is None]
        if empty:
            # reseed empty regions with the worst-served samples
            worst = np.argsort(-d, kind="stable")
            for j, i in zip(empty, worst):
                new[j] = xs[i].copy()
        codes = new
    return Codebook(codes, dist.name,
                    {"trainer": "kmeans", "seed": config.seed, "iterations": it, "converged": converged},
                    history)


def sgg_fit(data, config: TrainerConfig, init_codebook=None, progress: Progress | None = None) -> Codebook:
    """Stochastic generalized gradient descent (online competitive learning).

    One pass per epoch over a freshly shuffled order; ``distortion_history``
    holds the empirical distortion before training and after each epoch.
    """
    dist = _check_trainable(config)
    if not config.schedule.satisfies_a1():
        raise ValueError("step-size schedule violates the Robbins-Monro conditions")
    xs = _prepare(data, config)
    rng = np.random.default_rng(config.seed)
    codes = _initial_codes(xs, config, init_codebook, rng)

    def current():
        return float(np.mean(np.min(_pair_table(codes, xs, dist, config.solver)[0], axis=1)))

    history = [current()]
    t = 0
    for epoch in range(config.epochs):
        for i in rng.permutation(len(xs)):
            t += 1
            D, perms = _pair_table(codes, xs[i][None], dist, config.solver)
            j = int(np.argmin(D[0]))
            step = act(perms[0][j], xs[i]) - codes[j]
            if 2.0 * np.linalg.norm(step) > config.grad_cap:
                raise NumericalError(f"gradient norm exceeds cap {config.grad_cap:g} at step {t}")
            codes[j] = codes[j] + config.schedule.rate(t) * step
        history.append(current())
        if progress is not None:
            progress(epoch + 1, history[-1])
    return Codebook(codes, dist.name,
                    {"trainer": "sgg", "seed": config.seed, "iterations": t, "epochs": config.epochs},
                    history)


# -- Lloyd-Max audits -----------------------------------------------------------------


@dataclass
class NNAuditReport:
    violations: int
    trials: int
    nn_distortion: float
    min_random_distortion: float


def encoder_distortion(D: np.ndarray, labels: np.ndarray) -> float:
    """Empirical distortion of an arbitrary encoder given the full distortion table."""
    return float(np.mean(D[np.arange(len(D)), labels]))


def audit_nearest_neighbor(cb: Codebook, data, trials: int = 100, seed: int = 0,
                           solver: Solver | str | None = None, distortion: str | None = None) -> NNAuditReport:
    """Check that random encoders never beat the nearest-neighbor encoder."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    D = distortion_table(cb, data, solver, distortion)
    nn = float(np.mean(D.min(axis=1)))
    rng = np.random.default_rng(seed)
    violations, lowest = 0, np.inf
    for _ in range(trials):
        val = encoder_distortion(D, rng.integers(0, cb.k, size=len(D)))
        lowest = min(lowest, val)
        if val < nn - 1e-12:
            violations += 1
    return NNAuditReport(violations, trials, nn, float(lowest))


@dataclass
class CentroidAuditReport:
    improvements: int
    max_improvement: float
    perturbations: int
    radius: float
    per_region: list[dict]


def audit_centroid(cb: Codebook, data, perturbations: int = 200, radius: float = 0.1, seed: int = 0,
                   solver: Solver | str | None = None, tol: float = 1e-9) -> CentroidAuditReport:
    """Local centroid check: random perturbations of each code graph must not
    lower the mean squared distance of that code graph's region."""
    solver = as_solver(solver)
    xs = _stack(data)
    D, _ = _pair_table(cb.code_graphs, xs, Distortion("sq_metric"), solver)
    labels = np.argmin(D, axis=1)
    rng = np.random.default_rng(seed)
    total, worst, regions = 0, -np.inf, []
    for j, y in enumerate(cb.code_graphs):
        members = xs[labels == j]
        if len(members) == 0:
            regions.append({"region": j, "members": 0, "improvements": 0, "max_improvement": 0.0})
            continue
        base = float(np.mean(align_many(y, members, solver)[1]))
        count, best = 0, -np.inf
        for _ in range(perturbations):
            delta = rng.normal(size=y.shape)
            delta *= radius * rng.uniform() / np.linalg.norm(delta)
            val = float(np.mean(align_many(y + delta, members, solver)[1]))
            gain = base - val
            best = max(best, gain)
            if gain > tol:
                count += 1
        total += count
        worst = max(worst, best)
        regions.append({"region": j, "members": len(members), "base": base,
                        "improvements": count, "max_improvement": best})
    return CentroidAuditReport(total, float(worst), perturbations, radius, regions)
