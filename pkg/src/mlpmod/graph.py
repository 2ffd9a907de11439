"""Undirected weighted graph view of a feedforward network, plus exact
partition scoring.

Neurons of all layers (input and output included) are numbered
consecutively: layer 0 first, then layer 1, and so on. Edges exist only
between adjacent layers and carry the absolute trained weight; biases do
not appear in the graph.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "layer_starts",
    "total_neurons",
    "neuron_index",
    "neuron_position",
    "build_weight_adjacency",
    "validate_adjacency",
    "degrees",
    "degree",
    "volume",
    "cut_weight",
    "ncut",
]


def layer_starts(layer_widths: Sequence[int]) -> np.ndarray:
    """First global node index of each layer (a trailing total is appended)."""
    widths = np.asarray(layer_widths, dtype=np.int64)
    if widths.ndim != 1 or widths.size < 2:
        raise ValueError("need at least two layer widths")
    if np.any(widths < 1):
        raise ValueError("layer widths must be positive")
    return np.concatenate([[0], np.cumsum(widths)])


def total_neurons(layer_widths: Sequence[int]) -> int:
    return int(layer_starts(layer_widths)[-1])


def neuron_index(layer_widths: Sequence[int], layer: int, offset: int) -> int:
    """Global node index of the neuron at ``offset`` within ``layer``."""
    starts = layer_starts(layer_widths)
    if not 0 <= layer < len(layer_widths):
        raise ValueError(f"layer {layer} out of range")
    if not 0 <= offset < layer_widths[layer]:
        raise ValueError(f"offset {offset} out of range for layer {layer}")
    return int(starts[layer] + offset)


def neuron_position(layer_widths: Sequence[int], index: int) -> tuple[int, int]:
    """Inverse of :func:`neuron_index`: global node index -> (layer, offset)."""
    starts = layer_starts(layer_widths)
    n = int(starts[-1])
    if not 0 <= index < n:
        raise ValueError(f"node index {index} out of range for {n} neurons")
    layer = int(np.searchsorted(starts, index, side="right") - 1)
    return layer, index - int(starts[layer])


def build_weight_adjacency(
    layer_weight_matrices: Sequence[np.ndarray],
    layer_widths: Sequence[int],
) -> np.ndarray:
    """Adjacency matrix of the network graph from trained weight matrices.

    ``layer_weight_matrices[t]`` must have shape ``(widths[t+1], widths[t])``
    and connects layer ``t`` to layer ``t+1``. Each edge carries the absolute
    weight; everything else (including the diagonal) is zero. Biases are
    ignored.
    """
    widths = list(layer_widths)
    starts = layer_starts(widths)
    if len(layer_weight_matrices) != len(widths) - 1:
        raise ValueError(
            f"expected {len(widths) - 1} weight matrices for "
            f"{len(widths)} layers, got {len(layer_weight_matrices)}"
        )
    n = int(starts[-1])
    adjacency = np.zeros((n, n), dtype=np.float64)
    for t, w in enumerate(layer_weight_matrices):
        w = np.asarray(w, dtype=np.float64)
        expected = (widths[t + 1], widths[t])
        if w.shape != expected:
            raise ValueError(
                f"weight matrix {t} has shape {w.shape}, expected {expected}"
            )
        block = np.abs(w).T  # rows: layer t, cols: layer t+1
        r0, r1 = starts[t], starts[t + 1]
        c0, c1 = starts[t + 1], starts[t + 2]
        adjacency[r0:r1, c0:c1] = block
        adjacency[c0:c1, r0:r1] = block.T
    return adjacency


def validate_adjacency(
    adjacency: np.ndarray,
    layer_widths: Sequence[int] | None = None,
    atol: float = 0.0,
) -> None:
    """Raise ``ValueError`` unless ``adjacency`` is a valid graph matrix.

    Checks symmetry, nonnegativity and a zero diagonal; with ``layer_widths``
    given, additionally checks that nonzeros appear only in adjacent-layer
    blocks.
    """
    a = np.asarray(adjacency)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"adjacency must be square, got shape {a.shape}")
    if not np.all(np.abs(a - a.T) <= atol):
        raise ValueError("adjacency is not symmetric")
    if np.any(a < 0):
        raise ValueError("adjacency has negative entries")
    if np.any(np.abs(np.diag(a)) > atol):
        raise ValueError("adjacency has nonzero diagonal entries")
    if layer_widths is not None:
        starts = layer_starts(layer_widths)
        if a.shape[0] != starts[-1]:
            raise ValueError(
                f"adjacency has {a.shape[0]} nodes, widths imply {starts[-1]}"
            )
        allowed = np.zeros(a.shape, dtype=bool)
        for t in range(len(layer_widths) - 1):
            r0, r1 = starts[t], starts[t + 1]
            c0, c1 = starts[t + 1], starts[t + 2]
            allowed[r0:r1, c0:c1] = True
            allowed[c0:c1, r0:r1] = True
        if np.any(a[~allowed] != 0):
            raise ValueError("nonzero entries outside adjacent-layer blocks")


def degrees(adjacency: np.ndarray) -> np.ndarray:
    """Row sums: the degree of every node."""
    return np.asarray(adjacency, dtype=np.float64).sum(axis=1)


def degree(adjacency: np.ndarray, node: int) -> float:
    n = adjacency.shape[0]
    if not 0 <= node < n:
        raise ValueError(f"node index {node} out of range for {n} nodes")
    return float(np.sum(adjacency[node]))


def _as_index_array(nodes: Iterable[int], n: int, what: str) -> np.ndarray:
    idx = np.asarray(sorted(nodes) if isinstance(nodes, (set, frozenset)) else list(nodes))
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise ValueError(f"{what} contains node indices outside 0..{n - 1}")
    return idx.astype(np.intp)


def volume(adjacency: np.ndarray, cluster: Iterable[int]) -> float:
    """Sum of degrees over ``cluster``. Empty clusters are rejected."""
    idx = _as_index_array(cluster, adjacency.shape[0], "cluster")
    if idx.size == 0:
        raise ValueError("volume of an empty cluster is undefined")
    return float(adjacency[idx].sum())


def cut_weight(adjacency: np.ndarray, left: Iterable[int], right: Iterable[int]) -> float:
    """Total edge weight between the node sets ``left`` and ``right``."""
    n = adjacency.shape[0]
    li = _as_index_array(left, n, "left set")
    ri = _as_index_array(right, n, "right set")
    if li.size == 0 or ri.size == 0:
        return 0.0
    return float(adjacency[np.ix_(li, ri)].sum())


def ncut(adjacency: np.ndarray, labels: np.ndarray, n_clusters: int | None = None) -> float:
    """Normalized cut of the partition given by ``labels``.

    ``labels[i]`` is the cluster of node ``i``, in ``0..n_clusters-1``; every
    cluster must be nonempty and have positive volume. Lower values mean the
    clusters are better separated; 0 means no edges cross cluster borders.
    """
    a = np.asarray(adjacency, dtype=np.float64)
    labels = np.asarray(labels)
    n = a.shape[0]
    if labels.shape != (n,):
        raise ValueError(f"labels must have shape ({n},), got {labels.shape}")
    k = int(labels.max()) + 1 if n_clusters is None else int(n_clusters)
    if k < 1 or labels.min() < 0 or labels.max() >= k:
        raise ValueError(f"labels must lie in 0..{k - 1}")
    deg = a.sum(axis=1)
    score = 0.0
    for c in range(k):
        mask = labels == c
        if not mask.any():
            raise ValueError(f"cluster {c} is empty")
        vol = float(deg[mask].sum())
        if vol == 0.0:
            raise ValueError(f"cluster {c} has zero volume; ncut is undefined")
        within = float(a[np.ix_(mask.nonzero()[0], mask.nonzero()[0])].sum())
        score += (vol - within) / vol
    return score
