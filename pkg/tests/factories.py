import numpy as np

from orderon.graph import OrderedGraph
from orderon.grid import Grid, GridOrderon, StepKernel


def random_cuts(rng, parts):
    inner = np.sort(rng.uniform(0.05, 0.95, parts - 1))
    return np.concatenate([[0.0], inner, [1.0]])


def random_grid(rng, max_columns=3, max_layers=2, max_cells=None):
    while True:
        columns = int(rng.integers(1, max_columns + 1))
        layers = [random_cuts(rng, int(rng.integers(1, max_layers + 1))) for _ in range(columns)]
        grid = Grid(random_cuts(rng, columns), layers)
        if max_cells is None or grid.num_cells <= max_cells:
            return grid


def symmetric(rng, n, low=0.0, high=1.0):
    values = rng.uniform(low, high, (n, n))
    return (values + values.T) / 2


def random_orderon(rng, max_columns=3, max_layers=2, grid=None) -> GridOrderon:
    grid = grid or random_grid(rng, max_columns, max_layers)
    return GridOrderon(grid, symmetric(rng, grid.num_cells))


def random_kernel(rng, max_cells=12) -> StepKernel:
    grid = random_grid(rng, max_columns=4, max_layers=3, max_cells=max_cells)
    return StepKernel(grid, symmetric(rng, grid.num_cells, -1.0, 1.0))


def naive_orderon(rng, columns) -> GridOrderon:
    grid = Grid(np.arange(columns + 1) / columns, [[0.0, 1.0]] * columns)
    return GridOrderon(grid, symmetric(rng, columns))


def random_graph(rng, n, p=0.5) -> OrderedGraph:
    upper = np.triu(rng.random((n, n)) < p, 1)
    return OrderedGraph(upper | upper.T)


def all_graphs(n):
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for mask in range(2 ** len(pairs)):
        adj = np.zeros((n, n), dtype=bool)
        for b, (i, j) in enumerate(pairs):
            if mask >> b & 1:
                adj[i, j] = adj[j, i] = True
        yield OrderedGraph(adj)
