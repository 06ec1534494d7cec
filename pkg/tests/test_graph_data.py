import numpy as np
import pytest

from conftest import make_random_graph
from nlgnn.errors import ContractError, IngestionError, ShapeError
from nlgnn.graph_data import Graph, Permutation, Split


def test_from_edges_symmetrizes_and_deduplicates():
    g = Graph.from_edges(4, [[0, 1], [1, 0], [0, 1], [2, 2], [2, 3]], np.zeros((4, 1)), [0, 1, 0, 1])
    assert g.num_edges == 2
    np.testing.assert_array_equal(g.degrees, [1, 1, 1, 1])
    np.testing.assert_array_equal(g.neighbors(0), [1])
    np.testing.assert_array_equal(g.neighbors(3), [2])
    assert g.num_classes == 2


def test_self_loops_dropped():
    g = Graph.from_edges(2, [[0, 0], [1, 1]], np.zeros((2, 1)), [0, 0], 1)
    assert g.num_edges == 0


def test_dangling_edge_rejected():
    with pytest.raises(IngestionError):
        Graph.from_edges(2, [[0, 2]], np.zeros((2, 1)), [0, 0])


def test_feature_rows_checked():
    with pytest.raises(ShapeError):
        Graph(n=2, csr_offsets=np.zeros(3, dtype=np.int64), csr_targets=np.zeros(0, dtype=np.int64),
              features=np.zeros((3, 1)), labels=np.zeros(2, dtype=np.int64), num_classes=1)


def test_label_range_checked():
    with pytest.raises(ContractError):
        Graph.from_edges(2, [], np.zeros((2, 1)), [0, 3], 2)


def test_arrays_are_read_only():
    g = make_random_graph()
    with pytest.raises(ValueError):
        g.features[0, 0] = 1.0


def test_caller_arrays_untouched():
    features = np.zeros((2, 1))
    labels = np.array([0, 1])
    Graph.from_edges(2, [[0, 1]], features, labels)
    features[0, 0] = 1.0
    labels[0] = 1


def test_closed_edges_include_self_loops_sorted_by_center():
    g = Graph.from_edges(3, [[0, 1], [1, 2]], np.zeros((3, 1)), [0, 1, 0])
    src, dst = g.closed_edges
    assert np.all(np.diff(dst) >= 0)
    pairs = set(zip(src.tolist(), dst.tolist()))
    assert pairs == {(0, 0), (1, 0), (0, 1), (1, 1), (2, 1), (1, 2), (2, 2)}


def test_adjacency_matches_edges():
    g = make_random_graph(seed=3)
    a = g.adjacency().toarray()
    np.testing.assert_array_equal(a, a.T)
    assert a.sum() == 2 * g.num_edges
    np.testing.assert_array_equal(a.sum(axis=1), g.degrees)


def test_relabel_moves_everything():
    g = make_random_graph(seed=5)
    pi = np.random.default_rng(0).permutation(g.n)
    h = g.relabel(pi)
    np.testing.assert_array_equal(h.labels[pi], g.labels)
    np.testing.assert_array_equal(h.features[pi], g.features)
    a, b = g.adjacency().toarray(), h.adjacency().toarray()
    np.testing.assert_array_equal(b[np.ix_(pi, pi)], a)


def test_permutation_inverse():
    perm = Permutation.from_order(np.array([2, 0, 1]))
    np.testing.assert_array_equal(perm.inverse, [1, 2, 0])
    np.testing.assert_array_equal(perm.order[perm.inverse], np.arange(3))
    assert len(Permutation.identity(4)) == 4


def test_permutation_must_be_bijection():
    with pytest.raises(ContractError):
        Permutation.from_order(np.array([0, 0, 1]))


def test_split_overlap_rejected():
    with pytest.raises(ContractError):
        Split(np.array([0, 1]), np.array([1]), np.array([2]))
