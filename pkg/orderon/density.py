import math
import itertools
import numpy as np
from enum import IntEnum
from dataclasses import dataclass

from .base import Global, log, make_rng, check_pattern_size
from .graph import OrderedGraph, PatternGraph, vertex_pairs
from .grid import StepFunction
from .sampling import sample_adjacency


class Method(IntEnum):
    exact = 0
    monte_carlo = 1

    def __str__(self):
        return self.name

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class DensityReport:
    value: float
    method: Method = Method.exact
    trials: int = 0
    stderr: float = 0.0


def multisets(n, k, chunk=None):
    """Nondecreasing k-tuples over range(n), in lexicographic order, as int arrays."""
    chunk = chunk or Global.DENSITY_CHUNK_SIZE
    it = itertools.combinations_with_replacement(range(n), k)
    while True:
        flat = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(it, chunk)), dtype=np.int64
        )
        if flat.size == 0:
            return
        yield flat.reshape(-1, k)


def repeat_factorials(tuples) -> np.ndarray:
    """prod over runs of equal consecutive entries of (run length)!"""
    prod = np.ones(len(tuples))
    run = np.ones(len(tuples))
    for c in range(1, tuples.shape[1]):
        run = np.where(tuples[:, c] == tuples[:, c - 1], run + 1, 1)
        prod *= run
    return prod


def adjacency_codes(adj) -> np.ndarray:
    """Pattern codes of a batch of k-vertex adjacency matrices, shape (count, k, k)."""
    k = adj.shape[-1]
    codes = np.zeros(adj.shape[0], dtype=np.int64)
    for b, (i, j) in enumerate(vertex_pairs(k)):
        codes |= adj[:, i, j].astype(np.int64) << b
    return codes


def pattern_distribution_graph(graph: OrderedGraph, k: int) -> np.ndarray:
    """
    Probability of every k-vertex pattern (indexed by code) under sampling k
    vertices with repetition and sorting them. A repeated vertex is a non-edge.
    """
    check_pattern_size(k)
    n, adj = graph.n, graph.adj
    pairs = vertex_pairs(k)
    size = 2 ** len(pairs)
    scale = math.factorial(k) / float(n) ** k

    dist = np.zeros(size)
    for tuples in multisets(n, k):
        weights = scale / repeat_factorials(tuples)
        codes = np.zeros(len(tuples), dtype=np.int64)
        for b, (i, j) in enumerate(pairs):
            codes |= adj[tuples[:, i], tuples[:, j]].astype(np.int64) << b
        dist += np.bincount(codes, weights=weights, minlength=size)
    return dist


def t_graph(pattern: PatternGraph, graph: OrderedGraph) -> DensityReport:
    dist = pattern_distribution_graph(graph, pattern.k)
    return DensityReport(float(np.clip(dist[pattern.code], 0, 1)))


def cell_assignments(W: StepFunction, k: int):
    """
    Cell sequences of length k with nondecreasing columns, and their weights
    k! * prod(measure) / prod over columns of (count in column)!.
    """
    grid = W.grid
    col, lam = grid.cell_column, grid.cell_measure
    cells = np.flatnonzero(lam > 0)

    tuples = cells[:, None]
    weights = lam[cells].astype(float)
    run = np.ones(len(cells))
    fact = np.ones(len(cells))
    for _ in range(1, k):
        last = tuples[:, -1]
        rows, nxt = np.nonzero(col[cells][None, :] >= col[last][:, None])
        nxt = cells[nxt]
        run = np.where(col[nxt] == col[last[rows]], run[rows] + 1, 1)
        fact = fact[rows] * run
        weights = weights[rows] * lam[nxt]
        tuples = np.column_stack([tuples[rows], nxt])
    return tuples, weights * math.factorial(k) / fact


def pattern_distribution_orderon(W: StepFunction, k: int) -> np.ndarray:
    check_pattern_size(k)
    pairs = vertex_pairs(k)
    tuples, weights = cell_assignments(W, k)
    values = W.values

    total = np.zeros(2 ** len(pairs))
    chunk = max(1, Global.DENSITY_CHUNK_SIZE // len(total))
    for start in range(0, len(tuples), chunk):
        part = tuples[start : start + chunk]
        dist = weights[start : start + chunk, None]
        for i, j in pairs:
            w = values[part[:, i], part[:, j]][:, None]
            dist = np.concatenate([dist * (1 - w), dist * w], axis=1)
        total += dist.sum(axis=0)
    return total


def t_orderon(pattern: PatternGraph, W: StepFunction) -> DensityReport:
    check_pattern_size(pattern.k)
    tuples, weights = cell_assignments(W, pattern.k)
    values = W.values
    prob = weights
    for i, j in vertex_pairs(pattern.k):
        w = values[tuples[:, i], tuples[:, j]]
        prob = prob * (w if pattern.has_edge(i + 1, j + 1) else 1 - w)
    return DensityReport(float(np.clip(prob.sum(), 0, 1)))


def t_montecarlo(pattern: PatternGraph, W: StepFunction, trials: int, seed) -> DensityReport:
    """
    Fraction of sampled G(k, W) equal to the pattern. Trials are drawn in
    chunks of Global.MONTE_CARLO_CHUNK_SIZE; chunk j uses stream (seed, j).
    """
    if trials < 1:
        raise ValueError(f"Monte-Carlo estimate needs trials >= 1, got {trials}")
    chunk = Global.MONTE_CARLO_CHUNK_SIZE
    hits = 0
    for j, start in enumerate(range(0, trials, chunk)):
        count = min(chunk, trials - start)
        adj = sample_adjacency(make_rng(seed, j), pattern.k, W, count)
        hits += int((adjacency_codes(adj) == pattern.code).sum())

    value = hits / trials
    log(f"t_montecarlo: {hits}/{trials} hits for {pattern}", level=3)
    return DensityReport(
        value=value,
        method=Method.monte_carlo,
        trials=trials,
        stderr=math.sqrt(value * (1 - value) / trials),
    )
