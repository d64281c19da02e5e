import numpy as np
import pytest
from conftest import make_expanded
from oracles import brute_force_graph, cosine, euclid

from diagnet import signedgraph
from diagnet.augment import ExpandedClass, ExpandedDataset
from diagnet.signedgraph import GraphConfig, GraphError, SignedGraph


def _two_by_two():
    a = ExpandedClass(0, np.array([[1.0, 0.1], [1.0, -0.1]]))
    b = ExpandedClass(1, np.array([[-1.0, 0.2], [-1.0, -0.3]]))
    return ExpandedDataset([a, b], 2)


def test_two_by_two_against_brute_force():
    exp = _two_by_two()
    g = signedgraph.build(exp, GraphConfig(1, 1))
    assert [(i, j) for i, j, p in g.edges if p > 0] == [(0, 1), (1, 0), (2, 3), (3, 2)]
    ref = brute_force_graph(exp.X, exp.classes_of, exp.provenance, 1, 1)
    assert g.edges == ref
    assert [(i, j) for i, j, p in g.edges if p < 0] == [(0, 2), (1, 3), (2, 0), (3, 1)]


def test_empty_config():
    g = signedgraph.build(_two_by_two(), GraphConfig(0, 0))
    assert g.edge_count == 0
    assert signedgraph.edge_partition(g) == ([], [])


@pytest.mark.parametrize("kind", ["angular_cosine", "euclidean"])
def test_random_graph_matches_oracle(kind):
    rng = np.random.default_rng(8)
    exp = make_expanded(rng, per_class=(60, 70, 40), n_pos=8, n_neg=7, dim=3)
    g = signedgraph.build(exp, GraphConfig(1, 4, kind))
    dist = euclid if kind == "euclidean" else cosine
    ref = brute_force_graph(exp.X, exp.classes_of, exp.provenance, 1, 4, dist)
    assert g.edges == ref
    assert signedgraph.validate(g, exp) == []


def test_negative_neighbors_are_negative_targets_only():
    rng = np.random.default_rng(1)
    exp = make_expanded(rng, per_class=(5, 5), n_pos=2, n_neg=2)
    g = signedgraph.build(exp, GraphConfig(3, 3))
    prov, cls = exp.provenance, exp.classes_of
    for i, j, p in g.edges:
        if p > 0:
            assert cls[i] == cls[j] and prov[j] != "negative"
        else:
            assert cls[i] != cls[j] or prov[j] == "negative"


def test_small_pools_give_fewer_edges():
    exp = _two_by_two()
    g = signedgraph.build(exp, GraphConfig(5, 5))
    assert g.edge_count == 4 * (1 + 2)
    assert signedgraph.validate(g, exp) == []


def test_single_class_without_negatives_rejected():
    exp = ExpandedDataset([ExpandedClass(0, np.eye(2) + 0.5)], 1)
    with pytest.raises(GraphError):
        signedgraph.build(exp, GraphConfig(1, 1))
    assert signedgraph.build(exp, GraphConfig(1, 0)).edge_count == 2


def test_partition_sizes_and_identity():
    g = SignedGraph(4, np.array([0, 1, 2, 0, 1, 2, 3, 3]), np.array([1, 0, 3, 2, 3, 0, 1, 2]),
                    np.array([1, 1, 1, -1, -1, -1, -1, -1]), np.zeros(4, int), np.array(["original"] * 4))
    plus, minus = signedgraph.edge_partition(g)
    assert (len(plus), len(minus)) == (3, 5)
    assert sorted(plus + minus) == sorted(g.edges)


def _tamper(g, src, dst, phi):
    return SignedGraph(g.node_count, np.asarray(src), np.asarray(dst), np.asarray(phi),
                       g.node_class, g.node_provenance, g.n_plus, g.n_minus)


def test_validate_self_edge():
    exp = _two_by_two()
    g = signedgraph.build(exp, GraphConfig(1, 1))
    bad = _tamper(g, np.r_[g.src, 2], np.r_[g.dst, 2], np.r_[g.phi, 1])
    problems = signedgraph.validate(bad, exp)
    assert len(problems) == 1 and "node 2" in problems[0]


def test_validate_cross_class_positive():
    exp = _two_by_two()
    g = signedgraph.build(exp, GraphConfig(1, 1))
    dst = g.dst.copy()
    dst[0] = 2  # first edge is 0 -> 1 with phi +1
    problems = signedgraph.validate(_tamper(g, g.src, dst, g.phi), exp)
    assert any("(0, 2)" in p for p in problems)


def test_edge_list_roundtrip(tmp_path, small_expanded):
    g = signedgraph.build(small_expanded, GraphConfig(1, 2))
    signedgraph.write_edge_list(g, tmp_path / "g.edges", tmp_path / "g.nodes.csv")
    back = signedgraph.read_edge_list(tmp_path / "g.edges", tmp_path / "g.nodes.csv")
    assert back.edges == g.edges
    assert np.array_equal(back.node_class, g.node_class)
    assert list(back.node_provenance) == list(g.node_provenance)
