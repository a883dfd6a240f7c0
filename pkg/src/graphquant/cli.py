"""Command line interface: ``graphquant <command> ...`` or ``python -m graphquant``.

Failures exit with status 2 and print exactly one line to stderr::

    ERROR <ErrorName>: <message>

``experiment`` exits with status 1 when a trainer's trend check fails.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import formats
from .alignment import Solver
from .calculus import fd_check, grad_loss
from .errors import GraphQuantError, OrderExceedsBound
from .graph import embed
from .harness import consistency_experiment, generate_mixture
from .quantizer import (TrainerConfig, Schedule, audit_centroid, audit_nearest_neighbor, empirical_distortion,
                        encode, kmeans_fit, sgg_fit)


def _solver(args) -> Solver:
    return Solver(args.solver, restarts=args.restarts, seed=args.seed)


def _embed_all(graphs, n):
    if n is None:
        n = max(g.order for g in graphs)
    too_big = [g.order for g in graphs if g.order > n]
    if too_big:
        raise OrderExceedsBound(f"dataset contains a graph of order {max(too_big)} but the order bound is {n}")
    return [embed(g, n) for g in graphs]


def _add_solver(p):
    p.add_argument("--solver", choices=("exact", "heuristic"), default="exact")
    p.add_argument("--restarts", type=int, default=16, help="heuristic solver restarts")
    p.add_argument("--seed", type=int, default=0)


def cmd_train(args, out):
    graphs = formats.load_dataset(args.data)
    data = _embed_all(graphs, args.order)
    distortion = f"edit:{args.cost}" if args.cost else args.distortion
    config = TrainerConfig(
        k=args.k, distortion=distortion, solver=_solver(args), seed=args.seed,
        max_iters=args.max_iters, rel_tol=args.tol, epochs=args.epochs,
        schedule=Schedule.parse(args.schedule), allow_discontinuous=args.allow_discontinuous,
    )
    progress = (lambda it, d: print(f"iteration {it} distortion {d!r}", file=sys.stderr)) if args.verbose else None
    fit = kmeans_fit if args.trainer == "kmeans" else sgg_fit
    cb = fit(data, config, progress=progress)
    formats.save_codebook(args.out, cb)
    print(f"trainer: {args.trainer}", file=out)
    print(f"k: {cb.k}", file=out)
    print(f"iterations: {cb.provenance['iterations']}", file=out)
    print(f"final_distortion: {cb.distortion_history[-1]!r}", file=out)
    return 0


def cmd_encode(args, out):
    cb = formats.load_codebook(args.codebook)
    data = _embed_all(formats.load_dataset(args.data), cb.order)
    solver = _solver(args)
    print("sample\tindex\tdistance\tdistortion\tperm", file=out)
    for i, x in enumerate(data):
        res = encode(cb, x, solver)
        distance = np.sqrt(res.distortion) if cb.distortion == "sq_metric" else res.distortion
        perm = ",".join(str(v + 1) for v in res.alignment.perm)
        print(f"{i + 1}\t{res.index + 1}\t{distance:.12g}\t{res.distortion:.12g}\t{perm}", file=out)
    return 0


def cmd_eval(args, out):
    cb = formats.load_codebook(args.codebook)
    data = _embed_all(formats.load_dataset(args.data), cb.order)
    rep = empirical_distortion(cb, data, _solver(args))
    print(f"distortion: {cb.distortion}", file=out)
    print(f"N: {rep.N}", file=out)
    print(f"mean: {rep.mean!r}", file=out)
    for j, (c, m) in enumerate(zip(rep.counts, rep.conditional_means)):
        cm = "nan" if c == 0 else repr(float(m))
        print(f"region {j + 1}: count={int(c)} conditional_mean={cm}", file=out)
    return 0


def cmd_audit(args, out):
    cb = formats.load_codebook(args.codebook)
    data = _embed_all(formats.load_dataset(args.data), cb.order)
    solver = _solver(args)
    if args.kind == "nn":
        rep = audit_nearest_neighbor(cb, data, args.trials, args.seed, solver)
        print(f"trials: {rep.trials}", file=out)
        print(f"nn_distortion: {rep.nn_distortion!r}", file=out)
        print(f"min_random_distortion: {rep.min_random_distortion!r}", file=out)
        print(f"violations: {rep.violations}", file=out)
        return 0
    if args.kind == "centroid":
        rep = audit_centroid(cb, data, args.trials, args.radius, args.seed, solver)
        for r in rep.per_region:
            print(f"region {r['region'] + 1}: members={r['members']} improvements={r['improvements']}", file=out)
        print(f"max_improvement: {rep.max_improvement!r}", file=out)
        print(f"violations: {rep.improvements}", file=out)
        return 0
    # grad: finite differences of min_j d(x, Y_j)^2 with respect to the winning code graph
    h = args.step
    stable, violations, worst = 0, 0, 0.0
    for x in data:
        j, g = grad_loss(cb.code_graphs, x, solver)
        codes = list(cb.code_graphs)

        def f(y, j=j, x=x):
            codes[j] = y
            return min(float(np.sum((c - _aligned(c, x, solver)) ** 2)) for c in codes)

        def witness(y, j=j, x=x):
            codes[j] = y
            return grad_loss(codes, x, solver)[1].witness

        rep = fd_check(f, cb.code_graphs[j], g, h, seed=args.seed, witness=witness)
        codes[j] = cb.code_graphs[j]
        if rep.unstable_alignment:
            continue
        stable += 1
        worst = max(worst, rep.max_deviation)
        if rep.max_deviation > 10 * h:
            violations += 1
    print(f"points: {len(data)}", file=out)
    print(f"stable_points: {stable}", file=out)
    print(f"max_deviation: {worst!r}", file=out)
    print(f"violations: {violations}", file=out)
    return 0


def _aligned(y, x, solver):
    from .alignment import align_many
    from .graph import act

    (p,), _ = align_many(y, x[None], solver)
    return act(p, x)


def cmd_gen(args, out):
    plan = formats.load_plan(args.plan)
    seed = plan.generator.seed if args.seed is None else args.seed
    graphs = generate_mixture(plan.generator, args.n, seed=seed)
    formats.save_dataset(args.out, graphs, name=args.name, undirected=plan.generator.undirected)
    print(f"wrote {len(graphs)} graphs to {args.out}", file=out)
    return 0


def cmd_experiment(args, out):
    plan = formats.load_plan(args.plan)
    progress = (lambda msg: print(msg, file=sys.stderr)) if args.verbose else None
    rep = consistency_experiment(plan, progress)
    print(f"reference_distortion: {rep.reference_distortion!r}", file=out)
    print(rep.table(), file=out)
    for t, ok in rep.trend_ok.items():
        print(f"trend {t}: {'ok' if ok else 'FAIL'}", file=out)
    if args.plot_data:
        with open(args.plot_data, "w", encoding="utf-8") as fh:
            fh.write("N\t" + "\t".join(rep.median_distortion) + "\n")
            for i, N in enumerate(rep.sample_sizes):
                fh.write(f"{N}\t" + "\t".join(repr(v[i]) for v in rep.median_distortion.values()) + "\n")
    return 0 if all(rep.trend_ok.values()) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphquant", description="Graph quantization toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a codebook from a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--trainer", choices=("kmeans", "sgg"), default="kmeans")
    p.add_argument("--distortion", default="sq_metric")
    p.add_argument("--cost", help="edit cost: sqeuclid, euclid or indel:<c>; implies an edit distortion")
    p.add_argument("--allow-discontinuous", action="store_true")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--schedule", default="1:1", help="SGG step sizes a:b for eta_t = a/(b+t)")
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--order", type=int, help="order bound n (default: largest graph)")
    p.add_argument("--verbose", action="store_true")
    _add_solver(p)
    p.set_defaults(func=cmd_train)

    for name, func, help_ in (("encode", cmd_encode, "assign samples to code graphs"),
                              ("eval", cmd_eval, "empirical distortion report")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--codebook", required=True)
        p.add_argument("--data", required=True)
        _add_solver(p)
        p.set_defaults(func=func)

    p = sub.add_parser("audit", help="Lloyd-Max and gradient audits")
    p.add_argument("kind", choices=("nn", "centroid", "grad"))
    p.add_argument("--codebook", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--trials", type=int, default=100, help="random encoders (nn) or perturbations (centroid)")
    p.add_argument("--radius", type=float, default=0.1)
    p.add_argument("--step", type=float, default=1e-5)
    _add_solver(p)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("gen", help="sample a synthetic dataset from a plan's generator")
    p.add_argument("--plan", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--name", default="synthetic")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("experiment", help="sample-size consistency trend")
    p.add_argument("--plan", required=True)
    p.add_argument("--plot-data", help="write N vs median distortion columns here")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except GraphQuantError as exc:
        name, msg = exc.code, str(exc)
    except (ValueError, KeyError, TypeError) as exc:
        name, msg = "InvalidArgument", str(exc)
    except OSError as exc:
        name, msg = "IOError", str(exc)
    print(f"ERROR {name}: {' '.join(msg.split())}", file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())
