import numpy as np
import pytest

from orderon.base import AsymmetricValues, OutOfRangeValue, BadBreakpoints
from orderon.graph import OrderedGraph, odd_clique
from orderon.grid import (
    Grid,
    build_grid_orderon,
    constant_orderon,
    odd_clique_limit,
    embed,
    common_refinement,
    refine_to_resolution,
    load_orderon,
    save_orderon,
)
from orderon.norms import l1_distance

from factories import random_orderon, random_graph


def random_points(rng, count):
    return rng.random(count), rng.random(count), rng.random(count), rng.random(count)


def test_constant_orderon():
    W = build_grid_orderon([0, 1], [[0, 1]], [[0.5]])
    assert W.num_cells == 1
    assert W.integral() == pytest.approx(0.5)
    assert W.evaluate(0.3, 0.9, 0.7, 0.1) == 0.5


def test_validation_errors():
    with pytest.raises(AsymmetricValues):
        build_grid_orderon([0, 0.5, 1], [[0, 1], [0, 1]], [[0, 0.2], [0.4, 0]])
    with pytest.raises(OutOfRangeValue):
        build_grid_orderon([0, 1], [[0, 1]], [[1.5]])
    with pytest.raises(OutOfRangeValue):
        build_grid_orderon([0, 1], [[0, 1]], [[np.nan]])
    with pytest.raises(BadBreakpoints):
        build_grid_orderon([0, 0.6, 0.4, 1], [[0, 1]] * 3, np.zeros((3, 3)))
    with pytest.raises(BadBreakpoints):
        build_grid_orderon([0.1, 1], [[0, 1]], [[0]])
    with pytest.raises(BadBreakpoints):
        build_grid_orderon([0, 1], [[0, 1]], np.zeros((2, 2)))


def test_odd_clique_limit(rng):
    W = odd_clique_limit()
    assert W.evaluate(0.1, 0.2, 0.9, 0.4) == 1
    assert W.evaluate(0.1, 0.2, 0.9, 0.6) == 0
    assert W.evaluate(0.5, 0.7, 0.5, 0.8) == 0
    x, a, y, b = random_points(rng, 1000)
    assert np.array_equal(W.evaluate(x, a, y, b), ((a <= 0.5) & (b <= 0.5)).astype(float))


def test_embed_complete_graph_has_empty_diagonal():
    W = embed(OrderedGraph.complete(2))
    assert W.grid.num_columns == 2
    assert np.array_equal(W.values, [[0, 1], [1, 0]])


def test_embed_index_map():
    W = embed(OrderedGraph.empty(4))
    # Q_4(0.5) = 2 and Q_4(0) = 1, 1-indexed
    assert W.grid.column_of(0.5) == 1
    assert W.grid.column_of(0.0) == 0
    assert W.grid.column_of(1.0) == 3


def test_embed_odd_clique():
    W = embed(odd_clique(2))
    expected = np.zeros((4, 4))
    expected[0, 2] = expected[2, 0] = 1
    assert np.array_equal(W.values, expected)


def test_embed_evaluates_like_graph(rng):
    for n in (3, 5, 8):
        G = random_graph(rng, n)
        W = embed(G)
        x, a, y, b = random_points(rng, 1000)
        qx = np.maximum(np.ceil(n * x).astype(int), 1) - 1
        qy = np.maximum(np.ceil(n * y).astype(int), 1) - 1
        assert np.array_equal(W.evaluate(x, a, y, b), G.adj[qx, qy].astype(float))


def test_cell_measures_sum_to_one(rng):
    for _ in range(20):
        W = random_orderon(rng, max_columns=5, max_layers=4)
        assert W.cell_measure.sum() == pytest.approx(1, abs=1e-12)


def test_common_refinement_of_same_orderon(rng):
    W = random_orderon(rng)
    A, B = common_refinement(W, W)
    assert A.grid == W.grid
    assert B.grid == W.grid


def test_common_refinement_unions_breakpoints():
    W = build_grid_orderon([0, 0.5, 1], [[0, 1]] * 2, [[0.1, 0.2], [0.2, 0.3]])
    U = build_grid_orderon([0, 1 / 3, 2 / 3, 1], [[0, 1]] * 3, np.full((3, 3), 0.4))
    A, B = common_refinement(W, U)
    assert np.allclose(A.grid.xcuts, [0, 1 / 3, 0.5, 2 / 3, 1])
    assert A.grid == B.grid


def test_common_refinement_preserves_functions(rng):
    for _ in range(10):
        W, U = random_orderon(rng), random_orderon(rng)
        A, B = common_refinement(W, U)
        x, a, y, b = random_points(rng, 1000)
        assert np.array_equal(A.evaluate(x, a, y, b), W.evaluate(x, a, y, b))
        assert np.array_equal(B.evaluate(x, a, y, b), U.evaluate(x, a, y, b))
        assert l1_distance(W, A) == pytest.approx(0, abs=1e-12)


def test_refine_to_resolution(rng):
    W = random_orderon(rng)
    R = refine_to_resolution(W, 4)
    assert R.grid.has_xcuts([0, 0.25, 0.5, 0.75, 1])
    assert refine_to_resolution(R, 2) is R
    assert R.integral() == pytest.approx(W.integral(), abs=1e-12)


def test_degrees_of_constant():
    assert np.allclose(constant_orderon(0.3).degrees(), [0.3])


def test_orderon_file(tmp_path, rng):
    W = random_orderon(rng)
    save_orderon(W, tmp_path / "w.json")
    V = load_orderon(tmp_path / "w.json")
    assert V.grid == W.grid
    assert np.allclose(V.values, W.values)


def test_grid_union_keeps_column_layers():
    A = Grid([0, 0.5, 1], [[0, 0.5, 1], [0, 1]])
    B = Grid([0, 0.25, 1], [[0, 1], [0, 0.3, 1]])
    U = A.union(B)
    assert U.num_columns == 3
    assert np.allclose(U.layers[0], [0, 0.5, 1])
    assert np.allclose(U.layers[1], [0, 0.3, 0.5, 1])
    assert np.allclose(U.layers[2], [0, 0.3, 1])
