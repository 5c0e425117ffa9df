import numpy as np
import pytest

from orderon.base import BadGraph, BadSpec
from orderon.graph import (
    OrderedGraph,
    WeightedOrderedGraph,
    PatternGraph,
    PropertySpec,
    PropertyKind,
    all_patterns,
    odd_clique,
    blowup,
    threshold_family,
    read_graph,
    write_graph,
    read_family,
    write_family,
)
from orderon.grid import embed
from orderon.density import t_orderon
from orderon.norms import l1_distance

from factories import random_graph


def test_odd_clique():
    assert odd_clique(1).n == 2 and odd_clique(1).edges() == []
    assert odd_clique(2).edges() == [(1, 3)]
    assert odd_clique(3).edges() == [(1, 3), (1, 5), (3, 5)]
    with pytest.raises(BadGraph):
        odd_clique(0)


def test_graph_validation():
    with pytest.raises(BadGraph):
        OrderedGraph([[0, 1], [0, 0]])
    with pytest.raises(BadGraph):
        OrderedGraph([[1, 0], [0, 0]])
    with pytest.raises(BadGraph):
        OrderedGraph(np.zeros((0, 0)))
    with pytest.raises(BadGraph):
        OrderedGraph.from_edges(3, [(1, 4)])
    with pytest.raises(BadGraph):
        WeightedOrderedGraph([[0, 2], [2, 0]])


def test_graph_basics():
    G = OrderedGraph.from_edges(4, [(1, 2), (2, 4)])
    assert G.num_edges == 2
    assert G.edge_density == pytest.approx(2 / 6)
    assert G.has_edge(4, 2) and not G.has_edge(1, 3)
    assert G.induced([1, 3]).edges() == [(1, 2)]
    assert G == OrderedGraph.from_edges(4, [(2, 4), (2, 1)])


def test_pattern_codes():
    F = PatternGraph(3, [(2, 3)])
    # pairs in lexicographic order: 12, 13, 23
    assert F.code == 0b100
    assert PatternGraph.from_code(3, F.code) == F
    assert PatternGraph.from_graph(OrderedGraph.from_edges(3, [(2, 3)])) == F
    assert [p.code for p in all_patterns(3)] == list(range(8))
    assert PatternGraph.complete(3).code == 7
    assert PatternGraph(3, [(1, 3)]).describe() == "13"
    assert PatternGraph(3).describe() == "-"
    assert PatternGraph.clique_plus_isolated(4, [1, 3, 4]).edges == ((1, 3), (1, 4), (3, 4))
    with pytest.raises(BadGraph):
        PatternGraph(2, [(1, 1)])


def test_threshold_family():
    family = threshold_family()
    assert len(family) == 18
    assert sum(p.k == 3 for p in family) == 2
    for p in family:
        assert not p.has_edge(1, 2)
        assert p.has_edge(p.k - 1, p.k)


def test_property_spec_validation():
    with pytest.raises(BadSpec):
        PropertySpec.forbidden([])
    with pytest.raises(BadSpec):
        PropertySpec.forbidden([PatternGraph(1)])
    spec = PropertySpec.threshold()
    assert spec.kind == PropertyKind.threshold
    assert spec.as_family().kind == PropertyKind.forbidden_family
    assert len(spec.as_family().patterns) == 18


def test_blowup_is_the_same_step_function(rng):
    for n in (3, 5):
        G = random_graph(rng, n)
        B = blowup(G, 2)
        assert B.n == 2 * n
        assert l1_distance(embed(G), embed(B)) == pytest.approx(0, abs=1e-12)
        F = PatternGraph(3, [(1, 2)])
        assert t_orderon(F, embed(G)).value == pytest.approx(t_orderon(F, embed(B)).value, abs=1e-12)


def test_blowup_weighted():
    G = WeightedOrderedGraph([[0, 0.5], [0.5, 0]])
    B = blowup(G, 3)
    assert B.n == 6
    assert B.w[0, 5] == 0.5 and B.w[0, 1] == 0


def test_graph_file(tmp_path):
    G = OrderedGraph.from_edges(5, [(1, 2), (3, 5)])
    write_graph(G, tmp_path / "g.txt")
    assert read_graph(tmp_path / "g.txt") == G

    (tmp_path / "comments.txt").write_text("# a comment\nn=3\n1 3\n")
    assert read_graph(tmp_path / "comments.txt").edges() == [(1, 3)]

    (tmp_path / "bad.txt").write_text("n=3\n3 1\n")
    with pytest.raises(BadGraph):
        read_graph(tmp_path / "bad.txt")


def test_family_file(tmp_path):
    spec = PropertySpec.threshold().as_family()
    write_family(spec, tmp_path / "family.json")
    assert read_family(tmp_path / "family.json").patterns == spec.patterns
