import numpy as np
import pytest

from orderon.base import BadPartition, EmptyBlock
from orderon.grid import odd_clique_limit, embed, difference
from orderon.sampling import gnp
from orderon.norms import cut_norm_exact
from orderon.regularity import (
    CellPartition,
    stepping,
    energy,
    block_cap,
    fk_rounds,
    fk_partition,
)

from factories import random_orderon


def random_partition(rng, num_cells, max_blocks=3):
    return CellPartition(rng.integers(0, max_blocks, num_cells))


def test_partition_labels():
    P = CellPartition([2, 2, 0, 1])
    assert P.labels.tolist() == [0, 0, 1, 2]
    assert P.num_blocks == 3
    assert [b.tolist() for b in P.blocks] == [[0, 1], [2], [3]]
    assert P == CellPartition.from_blocks([[0, 1], [2], [3]], 4)
    assert P.split([1, 2]).num_blocks == 4
    assert CellPartition.trivial(4).split([0, 1], [1]).blocks[0].tolist() == [0]


def test_partition_errors():
    with pytest.raises(EmptyBlock):
        CellPartition.from_blocks([[0, 1], []], 2)
    with pytest.raises(BadPartition):
        CellPartition.from_blocks([[0, 1], [1]], 2)
    with pytest.raises(BadPartition):
        CellPartition.from_blocks([[0]], 2)
    with pytest.raises(BadPartition):
        CellPartition([])
    with pytest.raises(BadPartition):
        stepping(random_orderon(np.random.default_rng(0)), CellPartition.trivial(100))


def test_stepping_extremes(rng):
    for _ in range(10):
        W = random_orderon(rng)
        assert np.allclose(stepping(W, CellPartition.singletons(W.num_cells)).values, W.values)
        flat = stepping(W, CellPartition.trivial(W.num_cells))
        assert np.allclose(flat.values, W.integral())


def test_stepping_is_a_projection(rng):
    for _ in range(20):
        W = random_orderon(rng)
        P = random_partition(rng, W.num_cells)
        WP = stepping(W, P)
        assert np.allclose(stepping(WP, P).values, WP.values, atol=1e-12)
        assert WP.integral() == pytest.approx(W.integral(), abs=1e-12)
        assert energy(WP) <= energy(W) + 1e-12


def test_stepping_is_contractive(rng):
    for _ in range(30):
        W = random_orderon(rng)
        P = random_partition(rng, W.num_cells)
        U = stepping(random_orderon(rng, grid=W.grid), P)
        lhs = cut_norm_exact(difference(W, stepping(W, P))).value
        rhs = cut_norm_exact(difference(W, U)).value
        assert lhs <= 2 * rhs + 1e-9


def test_block_cap():
    assert block_cap(0.3, 200) == 200
    assert block_cap(1.0, 10**6) == 16
    assert block_cap(0.5, 10) == 10


def test_odd_clique_limit_partition():
    P, residual = fk_partition(odd_clique_limit(), 0.1)
    assert P.num_blocks == 2
    assert residual == pytest.approx(0, abs=1e-12)

    # the trivial partition is already within 0.3
    P, residual = fk_partition(odd_clique_limit(), 0.3)
    assert P.num_blocks == 1
    assert residual == pytest.approx(0.1875)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_random_graph_partition(seed):
    W = embed(gnp(200, 0.5, seed))
    P, residual = fk_partition(W, 0.3, seed=seed)
    assert residual <= 0.3
    assert P.num_blocks <= 2**12


def test_rounds_gain_energy(rng):
    for seed in range(10):
        W = random_orderon(rng)
        rounds = list(fk_rounds(W, 0.01, seed))
        cap = block_cap(0.01, W.num_cells)
        for before, after in zip(rounds, rounds[1:]):
            assert after.energy > before.energy
            assert after.partition.num_blocks > before.partition.num_blocks
        assert all(r.partition.num_blocks <= cap for r in rounds)
        assert all(r.violation >= 0 for r in rounds)


def test_rounds_are_reproducible(rng):
    W = random_orderon(rng)
    first = [r.violation for r in fk_rounds(W, 0.01, 5)]
    second = [r.violation for r in fk_rounds(W, 0.01, 5)]
    assert first == second
    with pytest.raises(ValueError):
        list(fk_rounds(W, 0.0))


def test_violations_strictly_decrease(rng):
    for seed in range(200):
        W = random_orderon(rng)
        violations = [r.violation for r in fk_rounds(W, 0.01, seed)]
        assert violations
        for before, after in zip(violations, violations[1:]):
            assert after < before
        P, residual = fk_partition(W, 0.01, seed)
        assert residual == violations[-1]
