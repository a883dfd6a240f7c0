"""Batch k-means and the stochastic update on a noisy two-shape mixture.

Run with ``python3 demos/kmeans_vs_sgg.py``.
"""

import numpy as np

import graphquant as gq
from graphquant.harness import GeneratorSpec, generate_mixture

# A five-vertex path and a five-vertex star, each with 2-dimensional attributes.
path = gq.AttributedGraph.from_edges([[1.0, 0.0]] * 5, [(i, i + 1, [1.0, 1.0]) for i in range(4)], undirected=True)
star = gq.AttributedGraph.from_edges([[1.0, 1.0]] + [[0.0, 1.0]] * 4, [(0, i, [1.0, 1.0]) for i in range(1, 5)],
                                 undirected=True)

# Samples are relabelled at random, so their matrices are scrambled copies.
gen = GeneratorSpec((path, star), sigma=0.1, flip=0.05, seed=3)
data = [gq.embed(g) for g in generate_mixture(gen, 200)]
print(f"{len(data)} samples of order {data[0].shape[0]}")

km = gq.kmeans_fit(data, gq.TrainerConfig(k=2, seed=1))
print("\nk-means distortion per iteration:")
print("  " + "  ".join(f"{d:.4f}" for d in km.distortion_history))

sgg = gq.sgg_fit(data, gq.TrainerConfig(k=2, seed=1, epochs=10, schedule=gq.Schedule(1.0, 10.0)))
print("stochastic update, distortion per epoch (first value is the initial codebook):")
print("  " + "  ".join(f"{d:.4f}" for d in sgg.distortion_history))

# How close did each code graph land to a generating shape?
for name, cb in [("k-means", km), ("sgg", sgg)]:
    dists = [[gq.kernel_metric(c, gq.embed(p)) for p in (path, star)] for c in cb.code_graphs]
    print(f"{name}: code-to-prototype distances", np.round(dists, 3).tolist())

# Lloyd-Max checks on the k-means codebook.
nn = gq.audit_nearest_neighbor(km, data, trials=100)
cen = gq.audit_centroid(km, data, perturbations=100)
print(f"\nrandom encoders beating nearest neighbour: {nn.violations}")
print(f"perturbations improving a centroid: {cen.improvements}")
