"""Synthetic graph mixtures and the sample-size consistency experiment."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .alignment import Solver, as_solver
from .errors import DimensionMismatch
from .graph import AttributedGraph, embed
from .quantizer import Codebook, Schedule, TrainerConfig, empirical_distortion, kmeans_fit, sgg_fit

EVAL_STREAM = 0xE7A1
TRAINERS = {"kmeans": kmeans_fit, "sgg": sgg_fit}


def _symmetric(g: AttributedGraph) -> bool:
    e = g.edge_attrs
    return all((j, i) in e and np.array_equal(a, e[j, i]) for (i, j), a in e.items())


@dataclass(frozen=True)
class GeneratorSpec:
    """Noisy, randomly relabelled copies of prototype graphs.

    Every nonzero attribute gets i.i.d. Gaussian noise of scale ``sigma``;
    each potential edge is toggled with probability ``flip`` (a new edge gets
    attribute ``1 + sigma * noise``).
    """

    prototypes: tuple[AttributedGraph, ...]
    sigma: float = 0.1
    flip: float = 0.0
    weights: tuple[float, ...] | None = None
    seed: int = 0
    undirected: bool = True

    def __post_init__(self):
        protos = tuple(self.prototypes)
        if not protos:
            raise ValueError("need at least one prototype")
        if len({g.dim for g in protos}) != 1:
            raise DimensionMismatch("prototypes must share the attribute dimension")
        if self.sigma < 0 or not 0 <= self.flip <= 1:
            raise ValueError("sigma must be >= 0 and flip in [0, 1]")
        if self.undirected and not all(_symmetric(g) for g in protos):
            raise ValueError("an undirected generator needs prototypes with mirrored edges")
        w = np.ones(len(protos)) if self.weights is None else np.asarray(self.weights, dtype=float)
        if w.shape != (len(protos),) or np.any(w < 0) or w.sum() <= 0:
            raise ValueError("weights must be nonnegative, one per prototype, not all zero")
        object.__setattr__(self, "prototypes", protos)
        object.__setattr__(self, "weights", tuple(float(v) for v in w / w.sum()))

    @property
    def order(self) -> int:
        return max(g.order for g in self.prototypes)

    @property
    def dim(self) -> int:
        return self.prototypes[0].dim


def _perturb(g: AttributedGraph, spec: GeneratorSpec, rng: np.random.Generator) -> AttributedGraph:
    m, h = g.order, g.dim
    x = embed(g)
    flips = rng.random((m, m)) < spec.flip
    noise = rng.normal(size=(m, m, h))
    perm = rng.permutation(m)
    off = ~np.eye(m, dtype=bool)
    if spec.undirected:
        upper = np.triu(off)
        flips = (flips & upper) | (flips & upper).T
        noise = np.where(upper[:, :, None], noise, noise.transpose(1, 0, 2))
    present = np.any(x != 0, axis=2)
    new_edge = flips & off & ~present
    dropped = flips & off & present
    y = np.where(present[:, :, None], x + spec.sigma * noise, 0.0)
    y[new_edge] = 1.0 + spec.sigma * noise[new_edge]
    y[dropped] = 0.0
    y = y[np.ix_(perm, perm)]
    idx = np.arange(m)
    edges = {(i, j): y[i, j] for i, j in zip(*np.nonzero(np.any(y != 0, axis=2) & off))}
    return AttributedGraph(y[idx, idx], edges, undirected=spec.undirected)


def generate_mixture(spec: GeneratorSpec, N: int, seed=None) -> list[AttributedGraph]:
    """Draw ``N`` graphs; fully determined by ``seed`` (default ``spec.seed``)."""
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    picks = rng.choice(len(spec.prototypes), size=N, p=spec.weights)
    return [_perturb(spec.prototypes[j], spec, rng) for j in picks]


@dataclass(frozen=True)
class ExperimentPlan:
    generator: GeneratorSpec
    sample_sizes: tuple[int, ...] = (10, 50, 250, 1250)
    config: TrainerConfig = field(default_factory=TrainerConfig)
    replications: int = 5
    trainers: tuple[str, ...] = ("kmeans", "sgg")
    eval_factor: int = 10
    eval_solver: Solver | None = None  # defaults to the training solver

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.sample_sizes)
        if not sizes or any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError("sample sizes must be strictly increasing")
        if sizes[0] < self.config.k:
            raise ValueError("smallest sample size must be at least k")
        if self.replications < 3:
            raise ValueError("replications must be >= 3")
        unknown = set(self.trainers) - TRAINERS.keys()
        if unknown:
            raise ValueError(f"unknown trainers {sorted(unknown)}")
        object.__setattr__(self, "sample_sizes", sizes)
        object.__setattr__(self, "trainers", tuple(self.trainers))
        object.__setattr__(self, "eval_solver", as_solver(self.eval_solver or self.config.solver))


@dataclass
class ExperimentReport:
    rows: list[dict]
    reference_distortion: float
    median_gap: dict[str, list[float]]
    median_distortion: dict[str, list[float]]
    trend_ok: dict[str, bool]
    sample_sizes: tuple[int, ...]
    best_codebooks: dict[str, Codebook] = field(default_factory=dict)

    def table(self) -> str:
        lines = ["trainer\tN\tmedian_distortion\tmedian_gap"]
        for t, gaps in self.median_gap.items():
            for N, d, g in zip(self.sample_sizes, self.median_distortion[t], gaps):
                lines.append(f"{t}\t{N}\t{d!r}\t{g!r}")
        return "\n".join(lines)


def trend_holds(values: Sequence[float], max_inversions: int = 1, slack: float = 0.05, atol: float = 1e-9) -> bool:
    """Non-increasing up to ``max_inversions`` rises of at most ``slack`` relative size."""
    inversions = 0
    for a, b in zip(values, values[1:]):
        if b - a <= atol:
            continue
        if b - a > slack * abs(a) + atol:
            return False
        inversions += 1
    return inversions <= max_inversions


def consistency_experiment(plan: ExperimentPlan, progress: Callable[[str], None] | None = None) -> ExperimentReport:
    """Train on growing samples and track held-out distortion against the prototypes.

    Replication ``r`` draws its training pool with seed ``generator.seed ^ r``
    and trains with seed ``config.seed ^ r``; training sets are nested
    prefixes of that pool.  All codebooks are scored on one held-out sample
    of size ``eval_factor * max(N)`` using ``plan.eval_solver``.
    """
    gen = plan.generator
    n = gen.order
    top = plan.sample_sizes[-1]
    held_out = [embed(g, n) for g in generate_mixture(gen, plan.eval_factor * top, seed=[gen.seed, EVAL_STREAM])]
    proto_cb = Codebook([embed(g, n) for g in gen.prototypes], "sq_metric")
    solver = plan.eval_solver
    reference = empirical_distortion(proto_cb, held_out, solver).mean

    rows, best = [], {}
    for r in range(plan.replications):
        pool = [embed(g, n) for g in generate_mixture(gen, top, seed=gen.seed ^ r)]
        config = dataclasses.replace(plan.config, seed=plan.config.seed ^ r)
        for trainer in plan.trainers:
            for N in plan.sample_sizes:
                cb = TRAINERS[trainer](pool[:N], config)
                d = empirical_distortion(cb, held_out, solver).mean
                rows.append({"trainer": trainer, "N": N, "replication": r, "distortion": d, "gap": d - reference})
                if N == top and (trainer not in best or d < best[trainer][0]):
                    best[trainer] = (d, cb)
                if progress is not None:
                    progress(f"{trainer} N={N} rep={r} distortion={d!r}")

    med_gap, med_dist, ok = {}, {}, {}
    for trainer in plan.trainers:
        med_dist[trainer] = [float(np.median([row["distortion"] for row in rows
                                              if row["trainer"] == trainer and row["N"] == N]))
                             for N in plan.sample_sizes]
        med_gap[trainer] = [d - reference for d in med_dist[trainer]]
        ok[trainer] = trend_holds(med_gap[trainer])
    return ExperimentReport(rows, reference, med_gap, med_dist, ok, plan.sample_sizes,
                            {t: cb for t, (_, cb) in best.items()})


# -- plan (de)serialization ----------------------------------------------------------


def plan_to_dict(plan: ExperimentPlan) -> dict:
    from .formats import PLAN_FORMAT, graph_to_record

    g, c = plan.generator, plan.config
    return {
        "format": PLAN_FORMAT, "version": 1,
        "generator": {
            "attribute_dim": g.dim, "undirected": g.undirected,
            "prototypes": [graph_to_record(p) for p in g.prototypes],
            "sigma": g.sigma, "flip": g.flip, "weights": list(g.weights), "seed": g.seed,
        },
        "sample_sizes": list(plan.sample_sizes),
        "replications": plan.replications,
        "trainers": list(plan.trainers),
        "eval_factor": plan.eval_factor,
        "eval_solver": plan.eval_solver.kind,
        "trainer": {
            "k": c.k, "distortion": c.distortion, "solver": c.solver.kind, "restarts": c.solver.restarts,
            "seed": c.seed, "max_iters": c.max_iters, "rel_tol": c.rel_tol, "epochs": c.epochs,
            "schedule": [c.schedule.a, c.schedule.b], "allow_discontinuous": c.allow_discontinuous,
        },
    }


def plan_from_dict(obj: dict) -> ExperimentPlan:
    from .formats import record_to_graph

    g = obj["generator"]
    h, undirected = int(g["attribute_dim"]), bool(g.get("undirected", True))
    gen = GeneratorSpec(
        tuple(record_to_graph(rec, h, undirected) for rec in g["prototypes"]),
        sigma=float(g.get("sigma", 0.1)), flip=float(g.get("flip", 0.0)),
        weights=g.get("weights"), seed=int(g.get("seed", 0)), undirected=undirected,
    )
    t = obj.get("trainer", {})
    a, b = t.get("schedule", [1.0, 1.0])
    config = TrainerConfig(
        k=int(t.get("k", len(gen.prototypes))), distortion=t.get("distortion", "sq_metric"),
        solver=Solver(t.get("solver", "exact"), restarts=int(t.get("restarts", 16)), seed=int(t.get("seed", 0))),
        seed=int(t.get("seed", 0)), max_iters=int(t.get("max_iters", 100)), rel_tol=float(t.get("rel_tol", 1e-6)),
        epochs=int(t.get("epochs", 50)), schedule=Schedule(float(a), float(b)),
        allow_discontinuous=bool(t.get("allow_discontinuous", False)),
    )
    return ExperimentPlan(gen, tuple(obj.get("sample_sizes", (10, 50, 250, 1250))), config,
                          int(obj.get("replications", 5)), tuple(obj.get("trainers", ("kmeans", "sgg"))),
                          int(obj.get("eval_factor", 10)),
                          Solver(obj["eval_solver"], restarts=config.solver.restarts, seed=config.solver.seed)
                          if obj.get("eval_solver") else None)
