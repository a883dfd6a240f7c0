"""Two tiny graphs, aligned by hand and by the library.

Run with ``python3 demos/worked_example.py``.
"""

import numpy as np

import graphquant as gq

# Two single-attribute graphs on two vertices and no edges.  Their
# representation matrices carry the vertex weights on the diagonal.
x = gq.embed(gq.AttributedGraph([1.0, 2.0]))
y = gq.embed(gq.AttributedGraph([3.0, 2.0]))
print("x diagonal:", np.diag(x[:, :, 0]), "  y diagonal:", np.diag(y[:, :, 0]))

# The optimal kernel searches every relabelling of y for the best inner
# product with x.  Swapping the two vertices of y pairs 1 with 2 and 2 with 3.
best = gq.optimal_kernel(x, y)
print(f"optimal kernel {best.value}  via permutation {best.perm}")
for p in [(0, 1), (1, 0)]:
    print(f"  perm {p}: <x, p.y> = {gq.kernel_of_alignment(x, y, p)}")

# Lengths and the induced metric.
print(f"|x|^2 = {gq.length(x) ** 2:g}, |y|^2 = {gq.length(y) ** 2:g}")
print(f"d(x, y) = {gq.kernel_metric(x, y):.12g}  (sqrt 2 = {np.sqrt(2):.12g})")

# The squared-Euclidean edit cost agrees with the squared metric.
print(f"edit cost {gq.edit_distance(x, y, 'sqeuclid').value:g} = d^2")

# Relabelling a graph never changes its distance to anything.
y_swapped = gq.act((1, 0), y)
print("d(x, y) unchanged by relabelling y:", gq.kernel_metric(x, y_swapped) == gq.kernel_metric(x, y))

# The generalized gradient of d^2 at y points away from the aligned x.
g = gq.grad_distance_sq(y, x)
print("gradient diagonal:", np.diag(g.matrix[:, :, 0]), " witness:", g.witness)
