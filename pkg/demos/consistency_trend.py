"""Held-out distortion as the training set grows.

A reduced ladder so it finishes in well under a minute; the acceptance
suite runs the full one.  Run with ``python3 demos/consistency_trend.py``.
"""

import graphquant as gq
from graphquant.harness import ExperimentPlan, GeneratorSpec, consistency_experiment

path = gq.AttributedGraph.from_edges([[1.0, 0.0]] * 5, [(i, i + 1, [1.0, 1.0]) for i in range(4)], undirected=True)
star = gq.AttributedGraph.from_edges([[1.0, 1.0]] + [[0.0, 1.0]] * 4, [(0, i, [1.0, 1.0]) for i in range(1, 5)],
                                 undirected=True)

plan = ExperimentPlan(
    GeneratorSpec((path, star), sigma=0.1, flip=0.05, seed=10),
    sample_sizes=(10, 40, 160),
    config=gq.TrainerConfig(k=2, seed=10, epochs=5),
    replications=3,
    eval_factor=5,
)
report = consistency_experiment(plan, progress=print)

# The gap compares each trained codebook with the generating shapes on the
# same held-out sample.  Negative values mean the data-driven codes fit the
# noisy distribution better than the noise-free shapes do.
print(f"\nreference distortion of the generating shapes: {report.reference_distortion:.4f}")
print(report.table())
for trainer, ok in report.trend_ok.items():
    print(f"trend {trainer}: {'ok' if ok else 'violated'}")
