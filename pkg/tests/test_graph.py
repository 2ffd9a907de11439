import numpy as np
import pytest

from mlpmod.graph import (
    build_weight_adjacency,
    cut_weight,
    degree,
    degrees,
    layer_starts,
    ncut,
    neuron_index,
    neuron_position,
    total_neurons,
    validate_adjacency,
    volume,
)


# ---------------------------------------------------------------------------
# naive reference implementations (independent of the module under test)

def naive_degree(a, i):
    total = 0.0
    for j in range(a.shape[0]):
        total += a[i, j]
    return total


def naive_volume(a, cluster):
    total = 0.0
    for i in cluster:
        total += naive_degree(a, i)
    return total


def naive_cut(a, left, right):
    total = 0.0
    for i in left:
        for j in right:
            total += a[i, j]
    return total


def naive_ncut(a, labels, k):
    total = 0.0
    for c in range(k):
        inside = [i for i in range(a.shape[0]) if labels[i] == c]
        outside = [i for i in range(a.shape[0]) if labels[i] != c]
        total += naive_cut(a, inside, outside) / naive_volume(a, inside)
    return total


def random_adjacency(rng, n, density=0.6, scale=5.0):
    a = rng.random((n, n)) * scale
    a *= rng.random((n, n)) < density
    a = np.triu(a, 1)
    return a + a.T


def random_partition(rng, a, k):
    """Random labels with nonempty, positive-volume clusters (resampled)."""
    n = a.shape[0]
    deg = a.sum(axis=1)
    for _ in range(1000):
        labels = rng.integers(0, k, size=n)
        ok = all(
            np.any(labels == c) and deg[labels == c].sum() > 0 for c in range(k)
        )
        if ok:
            return labels
    raise RuntimeError("could not sample a valid partition")


def path_graph(n):
    a = np.zeros((n, n))
    for i in range(n - 1):
        a[i, i + 1] = a[i + 1, i] = 1.0
    return a


def triangle_union(n_triangles):
    n = 3 * n_triangles
    a = np.zeros((n, n))
    for t in range(n_triangles):
        for i in range(3):
            for j in range(i + 1, 3):
                a[3 * t + i, 3 * t + j] = a[3 * t + j, 3 * t + i] = 1.0
    return a


# ---------------------------------------------------------------------------
# neuron numbering

def test_layer_starts_and_totals():
    widths = (784, 256, 256, 256, 256, 10)
    starts = layer_starts(widths)
    assert starts.tolist() == [0, 784, 1040, 1296, 1552, 1808, 1818]
    assert total_neurons(widths) == 1818


def test_neuron_index_bijection():
    widths = (3, 5, 2)
    seen = set()
    for layer, width in enumerate(widths):
        for offset in range(width):
            seen.add(neuron_index(widths, layer, offset))
    assert seen == set(range(10))
    for idx in range(10):
        layer, offset = neuron_position(widths, idx)
        assert neuron_index(widths, layer, offset) == idx


def test_neuron_index_range_errors():
    widths = (2, 2)
    with pytest.raises(ValueError):
        neuron_index(widths, 2, 0)
    with pytest.raises(ValueError):
        neuron_index(widths, 0, 2)
    with pytest.raises(ValueError):
        neuron_position(widths, 4)


# ---------------------------------------------------------------------------
# build_weight_adjacency

def test_build_weight_adjacency_1_2_1():
    weights = [np.array([[2.0], [-3.0]]), np.array([[0.5, 4.0]])]
    a = build_weight_adjacency(weights, (1, 2, 1))
    expected = np.zeros((4, 4))
    expected[0, 1] = expected[1, 0] = 2.0
    expected[0, 2] = expected[2, 0] = 3.0
    expected[1, 3] = expected[3, 1] = 0.5
    expected[2, 3] = expected[3, 2] = 4.0
    np.testing.assert_array_equal(a, expected)
    validate_adjacency(a, (1, 2, 1))


def test_build_weight_adjacency_zero_weights():
    weights = [np.zeros((2, 1)), np.zeros((1, 2))]
    a = build_weight_adjacency(weights, (1, 2, 1))
    np.testing.assert_array_equal(a, np.zeros((4, 4)))


def test_build_weight_adjacency_shape_mismatch():
    weights = [np.zeros((2, 1)), np.zeros((1, 3))]
    with pytest.raises(ValueError, match=r"shape \(1, 3\), expected \(1, 2\)"):
        build_weight_adjacency(weights, (1, 2, 1))
    with pytest.raises(ValueError, match="expected 2 weight matrices"):
        build_weight_adjacency(weights[:1], (1, 2, 1))


def test_build_weight_adjacency_default_architecture_pattern():
    # node count and sparsity blocks forced by the 784-256x4-10 architecture
    widths = (784, 256, 256, 256, 256, 10)
    rng = np.random.default_rng(0)
    weights = [
        rng.standard_normal((widths[t + 1], widths[t]))
        for t in range(len(widths) - 1)
    ]
    a = build_weight_adjacency(weights, widths)
    assert a.shape == (1818, 1818)
    validate_adjacency(a, widths)
    # construction oracle: every adjacent-layer entry must equal |w|
    starts = layer_starts(widths)
    for t in range(len(widths) - 1):
        block = a[starts[t] : starts[t + 1], starts[t + 1] : starts[t + 2]]
        np.testing.assert_array_equal(block, np.abs(weights[t]).T)


def test_build_weight_adjacency_invariants_random():
    rng = np.random.default_rng(1)
    for _ in range(20):
        n_layers = int(rng.integers(2, 5))
        widths = [int(rng.integers(1, 6)) for _ in range(n_layers)]
        weights = [
            rng.standard_normal((widths[t + 1], widths[t]))
            for t in range(n_layers - 1)
        ]
        a = build_weight_adjacency(weights, widths)
        validate_adjacency(a, widths)


# ---------------------------------------------------------------------------
# degree / volume / cut_weight

def test_degree_path_graph():
    a = path_graph(3)
    assert degree(a, 1) == 2.0
    assert degree(a, 0) == 1.0


def test_degree_isolated_node():
    a = np.zeros((3, 3))
    assert degree(a, 2) == 0.0


def test_degree_out_of_range():
    a = path_graph(3)
    with pytest.raises(ValueError, match="out of range"):
        degree(a, 3)


def test_degree_matches_row_sum_oracle():
    rng = np.random.default_rng(2)
    a = random_adjacency(rng, 8)
    for i in range(8):
        assert degree(a, i) == pytest.approx(naive_degree(a, i), rel=1e-12)
    np.testing.assert_allclose(degrees(a), [naive_degree(a, i) for i in range(8)])


def test_volume_whole_set_is_twice_total_weight():
    rng = np.random.default_rng(3)
    a = random_adjacency(rng, 7)
    total_weight = np.triu(a).sum()
    assert volume(a, range(7)) == pytest.approx(2 * total_weight, rel=1e-12)


def test_volume_singleton_and_subset():
    rng = np.random.default_rng(4)
    a = random_adjacency(rng, 9)
    assert volume(a, [4]) == pytest.approx(degree(a, 4), rel=1e-12)
    subset = [0, 2, 5, 8]
    assert volume(a, subset) == pytest.approx(naive_volume(a, subset), rel=1e-12)


def test_volume_empty_cluster_rejected():
    a = path_graph(3)
    with pytest.raises(ValueError, match="empty"):
        volume(a, [])


def test_cut_weight_disjoint_components():
    a = triangle_union(2)
    assert cut_weight(a, [0, 1, 2], [3, 4, 5]) == 0.0


def test_cut_weight_path_split():
    a = path_graph(4)
    assert cut_weight(a, [0, 1], [2, 3]) == 1.0


def test_cut_weight_full_set_counts_edges_twice():
    rng = np.random.default_rng(5)
    a = random_adjacency(rng, 6)
    nodes = list(range(6))
    assert cut_weight(a, nodes, nodes) == pytest.approx(a.sum(), rel=1e-12)


# ---------------------------------------------------------------------------
# ncut

def test_ncut_disjoint_triangles_is_zero():
    a = triangle_union(2)
    labels = np.array([0, 0, 0, 1, 1, 1])
    assert ncut(a, labels, 2) == 0.0


def test_ncut_path_hand_value():
    a = path_graph(4)
    labels = np.array([0, 0, 1, 1])
    expected = naive_ncut(a, labels, 2)
    assert expected == pytest.approx(2.0 / 3.0, rel=1e-12)
    assert ncut(a, labels, 2) == pytest.approx(expected, rel=1e-12)


def test_ncut_random_three_partition_matches_oracle():
    rng = np.random.default_rng(6)
    a = random_adjacency(rng, 10)
    labels = random_partition(rng, a, 3)
    assert ncut(a, labels, 3) == pytest.approx(naive_ncut(a, labels, 3), rel=1e-12)


def test_ncut_zero_volume_cluster_rejected():
    a = np.zeros((4, 4))
    a[0, 1] = a[1, 0] = 1.0
    labels = np.array([0, 0, 1, 1])  # cluster 1 has only isolated nodes
    with pytest.raises(ValueError, match="cluster 1"):
        ncut(a, labels, 2)


def test_ncut_empty_cluster_rejected():
    a = path_graph(4)
    labels = np.array([0, 0, 0, 0])
    with pytest.raises(ValueError, match="cluster 1 is empty"):
        ncut(a, labels, 2)


def test_ncut_matches_oracle_many_random_instances():
    rng = np.random.default_rng(7)
    for _ in range(300):
        n = int(rng.integers(4, 13))
        k = int(rng.integers(2, 5))
        if k > n:
            continue
        a = random_adjacency(rng, n, density=float(rng.uniform(0.4, 1.0)))
        if a.sum() == 0:
            continue
        try:
            labels = random_partition(rng, a, k)
        except RuntimeError:
            continue
        got = ncut(a, labels, k)
        want = naive_ncut(a, labels, k)
        assert got == pytest.approx(want, rel=1e-10)
        assert 0.0 <= got <= k + 1e-12


def test_ncut_scale_invariance():
    rng = np.random.default_rng(8)
    a = random_adjacency(rng, 9)
    labels = random_partition(rng, a, 3)
    base = ncut(a, labels, 3)
    for c in (1e-6, 0.5, 3.0, 1e6):
        assert ncut(c * a, labels, 3) == pytest.approx(base, rel=1e-10)


def test_ncut_permutation_equivariance():
    rng = np.random.default_rng(9)
    a = random_adjacency(rng, 11)
    labels = random_partition(rng, a, 3)
    base = ncut(a, labels, 3)
    perm = rng.permutation(11)
    permuted = a[np.ix_(perm, perm)]
    assert ncut(permuted, labels[perm], 3) == pytest.approx(base, rel=1e-12)


def test_ncut_zero_iff_no_crossing_edges():
    a = triangle_union(3)
    comp_labels = np.repeat([0, 1, 2], 3)
    assert ncut(a, comp_labels, 3) == 0.0
    # any split that crosses a triangle has positive ncut
    crossing = np.array([0, 1, 1, 2, 2, 2, 0, 0, 0])
    assert ncut(a, crossing, 3) > 0.0


def test_validate_adjacency_rejections():
    bad_sym = np.array([[0.0, 1.0], [2.0, 0.0]])
    with pytest.raises(ValueError, match="not symmetric"):
        validate_adjacency(bad_sym)
    bad_neg = np.array([[0.0, -1.0], [-1.0, 0.0]])
    with pytest.raises(ValueError, match="negative"):
        validate_adjacency(bad_neg)
    bad_diag = np.array([[1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(ValueError, match="diagonal"):
        validate_adjacency(bad_diag)
    off_block = np.zeros((4, 4))
    off_block[0, 3] = off_block[3, 0] = 1.0  # input to output: not adjacent
    with pytest.raises(ValueError, match="adjacent-layer"):
        validate_adjacency(off_block, (1, 2, 1))
