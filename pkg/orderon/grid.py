import json
import numpy as np
from pathlib import Path

from .base import (
    Global,
    BadBreakpoints,
    AsymmetricValues,
    OutOfRangeValue,
)
from .graph import OrderedGraph, WeightedOrderedGraph


def _frozen(arr):
    arr = np.array(arr, copy=True)
    arr.flags.writeable = False
    return arr


def check_cuts(cuts, name="breakpoints") -> np.ndarray:
    cuts = np.array(cuts, dtype=float)
    if cuts.ndim != 1 or len(cuts) < 2:
        raise BadBreakpoints(f"{name} need at least two entries, got {cuts.tolist()}")
    if not np.isfinite(cuts).all():
        raise BadBreakpoints(f"{name} must be finite, got {cuts.tolist()}")
    if abs(cuts[0]) > Global.TOLERANCE or abs(cuts[-1] - 1) > Global.TOLERANCE:
        raise BadBreakpoints(f"{name} must start at 0 and end at 1, got {cuts[0]} .. {cuts[-1]}")
    if not (np.diff(cuts) > 0).all():
        raise BadBreakpoints(f"{name} must be strictly increasing, got {cuts.tolist()}")
    cuts[0], cuts[-1] = 0.0, 1.0
    return cuts


def merge_cuts(*cut_arrays) -> np.ndarray:
    """Union of breakpoint sets; points closer than Global.TOLERANCE are one point."""
    merged = np.sort(np.concatenate([np.asarray(c, dtype=float) for c in cut_arrays]))
    keep = np.concatenate([[True], np.diff(merged) > Global.TOLERANCE])
    merged = merged[keep]
    merged[0], merged[-1] = 0.0, 1.0
    return merged


def locate(cuts, z) -> np.ndarray:
    """Interval index of z for intervals (cuts[i], cuts[i+1]]; 0 falls into the first one."""
    idx = np.searchsorted(cuts, z, side="left") - 1
    return np.clip(idx, 0, len(cuts) - 2)


class Grid:
    """
    Columns between consecutive x-breakpoints, each split into its own layers.
    Cells are enumerated column-major, then by layer.
    """

    def __init__(self, xcuts, layers):
        xcuts = check_cuts(xcuts, "x-breakpoints")
        num_columns = len(xcuts) - 1
        if len(layers) != num_columns:
            raise BadBreakpoints(
                f"Got {len(layers)} layer lists for {num_columns} columns"
            )
        self.xcuts = _frozen(xcuts)
        self.layers = tuple(
            _frozen(check_cuts(cuts, f"layer breakpoints of column {c}"))
            for c, cuts in enumerate(layers)
        )

        counts = np.array([len(cuts) - 1 for cuts in self.layers])
        self.column_offsets = _frozen(np.concatenate([[0], np.cumsum(counts)]))
        self.cell_column = _frozen(np.repeat(np.arange(num_columns), counts))
        self.cell_layer = _frozen(np.concatenate([np.arange(c) for c in counts]))

        self.cell_x0 = _frozen(self.xcuts[:-1][self.cell_column])
        self.cell_x1 = _frozen(self.xcuts[1:][self.cell_column])
        self.cell_a0 = _frozen(np.concatenate([cuts[:-1] for cuts in self.layers]))
        self.cell_a1 = _frozen(np.concatenate([cuts[1:] for cuts in self.layers]))
        self.cell_measure = _frozen(
            (self.cell_x1 - self.cell_x0) * (self.cell_a1 - self.cell_a0)
        )

    def __repr__(self):
        return f"Grid(columns={self.num_columns}, cells={self.num_cells})"

    def __eq__(self, other):
        if not isinstance(other, Grid) or len(self.xcuts) != len(other.xcuts):
            return False
        if not np.allclose(self.xcuts, other.xcuts, rtol=0, atol=Global.TOLERANCE):
            return False
        for a, b in zip(self.layers, other.layers):
            if len(a) != len(b) or not np.allclose(a, b, rtol=0, atol=Global.TOLERANCE):
                return False
        return True

    @property
    def num_columns(self) -> int:
        return len(self.xcuts) - 1

    @property
    def num_cells(self) -> int:
        return len(self.cell_column)

    def layer_count(self, c) -> int:
        return len(self.layers[c]) - 1

    def column_of(self, x) -> np.ndarray:
        return locate(self.xcuts, np.asarray(x, dtype=float))

    def cell_index(self, x, a) -> np.ndarray:
        x, a = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(a, dtype=float))
        shape = x.shape
        x, a = x.ravel(), a.ravel()
        col = self.column_of(x)
        idx = np.empty(len(x), dtype=np.int64)
        for c in np.unique(col):
            mask = col == c
            idx[mask] = self.column_offsets[c] + locate(self.layers[c], a[mask])
        return idx.reshape(shape)

    def midpoints(self) -> tuple[np.ndarray, np.ndarray]:
        return (self.cell_x0 + self.cell_x1) / 2, (self.cell_a0 + self.cell_a1) / 2

    def column_cells(self, c) -> np.ndarray:
        return np.arange(self.column_offsets[c], self.column_offsets[c + 1])

    def union(self, other: "Grid") -> "Grid":
        xcuts = merge_cuts(self.xcuts, other.xcuts)
        mids = (xcuts[:-1] + xcuts[1:]) / 2
        layers = [
            merge_cuts(self.layers[i], other.layers[j])
            for i, j in zip(self.column_of(mids), other.column_of(mids))
        ]
        return Grid(xcuts, layers)

    def with_xcuts(self, extra) -> "Grid":
        xcuts = merge_cuts(self.xcuts, extra)
        mids = (xcuts[:-1] + xcuts[1:]) / 2
        return Grid(xcuts, [self.layers[c] for c in self.column_of(mids)])

    def subdivide(self, parts: int) -> "Grid":
        """Split every column into `parts` equal sub-columns carrying its layers."""
        xcuts = [0.0]
        layers = []
        for c in range(self.num_columns):
            sub = np.linspace(self.xcuts[c], self.xcuts[c + 1], parts + 1)
            xcuts.extend(sub[1:])
            layers.extend([self.layers[c]] * parts)
        return Grid(xcuts, layers)

    def has_xcuts(self, cuts) -> bool:
        cuts = np.asarray(cuts, dtype=float)
        pos = np.clip(np.searchsorted(self.xcuts, cuts), 1, len(self.xcuts) - 1)
        gap = np.minimum(
            np.abs(self.xcuts[pos] - cuts), np.abs(self.xcuts[pos - 1] - cuts)
        )
        return bool((gap <= Global.TOLERANCE).all())


class StepFunction:
    LOWER = 0.0
    UPPER = 1.0

    def __init__(self, grid: Grid, values):
        values = np.array(values, dtype=float)
        num_cells = grid.num_cells
        if values.shape != (num_cells, num_cells):
            raise BadBreakpoints(
                f"Values must be {num_cells}x{num_cells} for a grid with "
                f"{num_cells} cells, got {values.shape}"
            )
        if not np.isfinite(values).all():
            raise OutOfRangeValue("Values must be finite")
        if not np.allclose(values, values.T, rtol=0, atol=Global.TOLERANCE):
            i, j = np.unravel_index(np.argmax(np.abs(values - values.T)), values.shape)
            raise AsymmetricValues(
                f"Values must be symmetric: values[{i}, {j}]={values[i, j]} "
                f"but values[{j}, {i}]={values[j, i]}"
            )
        lo, hi = values.min(), values.max()
        if lo < self.LOWER - Global.TOLERANCE or hi > self.UPPER + Global.TOLERANCE:
            raise OutOfRangeValue(
                f"Values must lie in [{self.LOWER}, {self.UPPER}], got range [{lo}, {hi}]"
            )
        values = np.clip((values + values.T) / 2, self.LOWER, self.UPPER)
        self.grid = grid
        self.values = _frozen(values)

    def __repr__(self):
        return (
            f"{type(self).__name__}(columns={self.grid.num_columns}, "
            f"cells={self.grid.num_cells})"
        )

    @property
    def num_cells(self) -> int:
        return self.grid.num_cells

    @property
    def cell_measure(self) -> np.ndarray:
        return self.grid.cell_measure

    def evaluate(self, x1, a1, x2, a2) -> np.ndarray:
        return self.values[self.grid.cell_index(x1, a1), self.grid.cell_index(x2, a2)]

    def refine(self, grid: Grid):
        """Same function on a grid whose breakpoints contain this grid's."""
        if grid == self.grid:
            return self
        src = self.grid.cell_index(*grid.midpoints())
        return type(self)(grid, self.values[np.ix_(src, src)])

    def integral(self) -> float:
        lam = self.grid.cell_measure
        return float(lam @ self.values @ lam)

    def degrees(self) -> np.ndarray:
        """Row integrals: the degree of every cell."""
        return self.values @ self.grid.cell_measure

    def to_dict(self) -> dict:
        return {
            "xcuts": self.grid.xcuts.tolist(),
            "layers": [cuts.tolist() for cuts in self.grid.layers],
            "values": self.values.tolist(),
        }


class GridOrderon(StepFunction):
    LOWER = 0.0
    UPPER = 1.0

    def __sub__(self, other):
        return difference(self, other)


class StepKernel(StepFunction):
    """Difference of two step orderons: entries in [-1, 1]."""

    LOWER = -1.0
    UPPER = 1.0

    def __abs__(self):
        lam = self.grid.cell_measure
        return float(lam @ np.abs(self.values) @ lam)


def build_grid_orderon(xcuts, layers, values) -> GridOrderon:
    return GridOrderon(Grid(xcuts, layers), values)


def constant_orderon(p) -> GridOrderon:
    return build_grid_orderon([0, 1], [[0, 1]], [[p]])


def odd_clique_limit() -> GridOrderon:
    """W*: one column, value 1 iff both points lie in the lower half layer."""
    return build_grid_orderon([0, 1], [[0, 0.5, 1]], [[1, 0], [0, 0]])


def embed(graph) -> GridOrderon:
    """Naive block orderon: n equal columns, one layer each, value G(i, j)."""
    n = graph.n
    grid = Grid(np.arange(n + 1) / n, [[0.0, 1.0]] * n)
    if isinstance(graph, WeightedOrderedGraph):
        return GridOrderon(grid, graph.w)
    if isinstance(graph, OrderedGraph):
        return GridOrderon(grid, graph.adj.astype(float))
    raise TypeError(f"Can't embed {type(graph).__name__}")


def common_refinement(W: StepFunction, U: StepFunction):
    if W.grid == U.grid:
        return W, U.refine(W.grid)
    grid = W.grid.union(U.grid)
    return W.refine(grid), U.refine(grid)


def difference(W: StepFunction, U: StepFunction) -> StepKernel:
    W, U = common_refinement(W, U)
    return StepKernel(W.grid, W.values - U.values)


def refine_to_resolution(W: StepFunction, r: int):
    cuts = np.arange(r + 1) / r
    if W.grid.has_xcuts(cuts):
        return W
    return W.refine(W.grid.with_xcuts(cuts))


def orderon_from_dict(data) -> GridOrderon:
    return build_grid_orderon(data["xcuts"], data["layers"], data["values"])


def load_orderon(path) -> GridOrderon:
    return orderon_from_dict(json.loads(Path(path).read_text()))


def save_orderon(W: StepFunction, path):
    Path(path).write_text(json.dumps(W.to_dict()))
