"""A trained MLP as a weighted graph, scored with the exact normalized cut.

Builds the graph of a tiny 1-2-1 network by hand, then shows how the ncut
of a partition reacts to where the boundary is drawn.
"""

import numpy as np

from mlpmod import build_weight_adjacency, cut_weight, degrees, ncut, volume

# a 1-2-1 network: one input, two hidden units, one output
weights = [
    np.array([[2.0], [-3.0]]),   # input -> hidden
    np.array([[0.5, 4.0]]),      # hidden -> output
]
adjacency = build_weight_adjacency(weights, (1, 2, 1))
print("adjacency (|weight| on adjacent-layer edges, nodes 0..3):")
print(adjacency)
print("degrees:", degrees(adjacency))

# partition A: input+hidden0 vs hidden1+output
labels_a = np.array([0, 0, 1, 1])
# partition B: cut the strong 4.0 edge instead
labels_b = np.array([0, 0, 1, 0])

for name, labels in (("A", labels_a), ("B", labels_b)):
    parts = [np.flatnonzero(labels == c) for c in (0, 1)]
    print(f"\npartition {name}: {labels.tolist()}")
    for c, part in enumerate(parts):
        others = np.flatnonzero(labels != c)
        print(
            f"  cluster {c}: volume={volume(adjacency, part):.2f} "
            f"cut={cut_weight(adjacency, part, others):.2f}"
        )
    print(f"  ncut = {ncut(adjacency, labels, 2):.4f}")

print("\nLower ncut means the boundary crosses less relative weight;")
print("cutting through the 4.0 edge is punished accordingly.")
