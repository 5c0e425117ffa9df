import json
import itertools
import numpy as np
from enum import IntEnum
from pathlib import Path
from functools import lru_cache

from .base import BadGraph, BadSpec, binom2


def _frozen(arr):
    arr = np.array(arr, copy=True)
    arr.flags.writeable = False
    return arr


class OrderedGraph:
    """
    Simple graph on the vertices 1..n taken in their natural order.
    Stored as a read-only boolean adjacency matrix (0-indexed).
    """

    def __init__(self, adj):
        adj = np.asarray(adj)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise BadGraph(f"Adjacency must be a square matrix, got shape {adj.shape}")
        if adj.shape[0] < 1:
            raise BadGraph("Graph must have at least one vertex")
        if not np.isin(adj, (0, 1)).all():
            raise BadGraph("Adjacency entries must be 0 or 1")
        adj = adj.astype(bool)
        if not (adj == adj.T).all():
            raise BadGraph("Adjacency must be symmetric")
        if adj.diagonal().any():
            raise BadGraph("Adjacency must have a zero diagonal")
        self._adj = _frozen(adj)

    def __repr__(self):
        return f"OrderedGraph(n={self.n}, edges={self.num_edges})"

    def __eq__(self, other):
        return isinstance(other, OrderedGraph) and np.array_equal(self._adj, other._adj)

    def __hash__(self):
        return hash((self.n, self._adj.tobytes()))

    @classmethod
    def from_edges(cls, n, edges):
        adj = np.zeros((n, n), dtype=bool)
        for i, j in edges:
            if not (1 <= i <= n and 1 <= j <= n) or i == j:
                raise BadGraph(f"Bad edge ({i}, {j}) for a graph on {n} vertices")
            adj[i - 1, j - 1] = adj[j - 1, i - 1] = True
        return cls(adj)

    @classmethod
    def empty(cls, n):
        return cls(np.zeros((n, n), dtype=bool))

    @classmethod
    def complete(cls, n):
        return cls(~np.eye(n, dtype=bool))

    @property
    def n(self) -> int:
        return self._adj.shape[0]

    @property
    def adj(self) -> np.ndarray:
        return self._adj

    @property
    def num_edges(self) -> int:
        return int(np.triu(self._adj, 1).sum())

    @property
    def edge_density(self) -> float:
        if self.n < 2:
            return 0.0
        return self.num_edges / binom2(self.n)

    def has_edge(self, i, j) -> bool:
        return bool(self._adj[i - 1, j - 1])

    def edges(self) -> list[tuple[int, int]]:
        rows, cols = np.nonzero(np.triu(self._adj, 1))
        return [(int(i) + 1, int(j) + 1) for i, j in zip(rows, cols)]

    def induced(self, vertices) -> "OrderedGraph":
        """vertices: 0-indexed, taken in the given order"""
        vertices = np.asarray(vertices, dtype=int)
        return OrderedGraph(self._adj[np.ix_(vertices, vertices)])


class WeightedOrderedGraph:
    def __init__(self, w):
        w = np.asarray(w, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise BadGraph(f"Weights must be a square matrix, got shape {w.shape}")
        if w.shape[0] < 1:
            raise BadGraph("Graph must have at least one vertex")
        if not np.allclose(w, w.T, rtol=0, atol=1e-12):
            raise BadGraph("Weights must be symmetric")
        if (w < 0).any() or (w > 1).any():
            raise BadGraph("Weights must lie in [0, 1]")
        self._w = _frozen((w + w.T) / 2)

    def __repr__(self):
        return f"WeightedOrderedGraph(n={self.n})"

    @property
    def n(self) -> int:
        return self._w.shape[0]

    @property
    def w(self) -> np.ndarray:
        return self._w


@lru_cache(maxsize=None)
def vertex_pairs(k: int) -> tuple[tuple[int, int], ...]:
    """0-indexed pairs (i, j), i < j, in lexicographic order; bit b of a pattern code is pair b."""
    return tuple(itertools.combinations(range(k), 2))


class PatternGraph:
    """Small ordered graph F whose density is counted; vertices 1..k."""

    def __init__(self, k, edges=()):
        if k < 1:
            raise BadGraph(f"Pattern must have at least one vertex, got k={k}")
        normalized = set()
        for i, j in edges:
            if i == j or not (1 <= i <= k and 1 <= j <= k):
                raise BadGraph(f"Bad pattern edge ({i}, {j}) for k={k}")
            normalized.add((min(i, j), max(i, j)))
        self.k = k
        self.edges = tuple(sorted(normalized))

        code = 0
        for b, (i, j) in enumerate(vertex_pairs(k)):
            if (i + 1, j + 1) in normalized:
                code |= 1 << b
        self.code = code

    def __repr__(self):
        return f"PatternGraph(k={self.k}, edges={list(self.edges)})"

    def __eq__(self, other):
        return isinstance(other, PatternGraph) and (self.k, self.code) == (other.k, other.code)

    def __hash__(self):
        return hash((self.k, self.code))

    @property
    def num_pairs(self) -> int:
        return binom2(self.k)

    @property
    def adj(self) -> np.ndarray:
        adj = np.zeros((self.k, self.k), dtype=bool)
        for i, j in self.edges:
            adj[i - 1, j - 1] = adj[j - 1, i - 1] = True
        return adj

    def has_edge(self, i, j) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def describe(self) -> str:
        if not self.edges:
            return "-"
        return " ".join(f"{i}{j}" for i, j in self.edges)

    @classmethod
    def from_code(cls, k, code):
        pairs = vertex_pairs(k)
        if not 0 <= code < 2 ** len(pairs):
            raise BadGraph(f"Pattern code {code} out of range for k={k}")
        edges = [(i + 1, j + 1) for b, (i, j) in enumerate(pairs) if code >> b & 1]
        return cls(k, edges)

    @classmethod
    def from_graph(cls, graph: OrderedGraph):
        return cls(graph.n, graph.edges())

    @classmethod
    def empty(cls, k):
        return cls(k)

    @classmethod
    def complete(cls, k):
        return cls(k, itertools.combinations(range(1, k + 1), 2))

    @classmethod
    def clique_plus_isolated(cls, k, clique):
        return cls(k, itertools.combinations(sorted(clique), 2))


def all_patterns(k) -> list[PatternGraph]:
    return [PatternGraph.from_code(k, code) for code in range(2 ** binom2(k))]


def odd_clique(n) -> OrderedGraph:
    """H_n: 2n vertices, i ~ j iff i != j and both are odd (1-indexed)."""
    if n < 1:
        raise BadGraph(f"odd_clique needs n >= 1, got {n}")
    odd = np.zeros(2 * n, dtype=bool)
    odd[::2] = True
    adj = np.outer(odd, odd)
    np.fill_diagonal(adj, False)
    return OrderedGraph(adj)


def blowup(graph, t):
    """Ordered t-blowup: G'(x, y) = G(ceil(x / t), ceil(y / t))."""
    if t < 1:
        raise BadGraph(f"Blowup factor must be positive, got {t}")
    if isinstance(graph, WeightedOrderedGraph):
        return WeightedOrderedGraph(np.kron(graph.w, np.ones((t, t))))
    adj = np.kron(graph.adj, np.ones((t, t), dtype=bool))
    return OrderedGraph(adj)


class PropertyKind(IntEnum):
    forbidden_family = 0
    threshold = 1

    def __str__(self):
        return self.name

    def __repr__(self):
        return self.name


def threshold_family() -> list[PatternGraph]:
    """
    Forbidden family of the threshold property: a non-edge u1u2 followed by an
    edge u3u4 with u1 < u2 <= u3 < u4. u2 == u3 gives the 3-vertex patterns.
    """
    family = []
    for code in range(2 ** binom2(3)):
        pattern = PatternGraph.from_code(3, code)
        if not pattern.has_edge(1, 2) and pattern.has_edge(2, 3):
            family.append(pattern)
    for code in range(2 ** binom2(4)):
        pattern = PatternGraph.from_code(4, code)
        if not pattern.has_edge(1, 2) and pattern.has_edge(3, 4):
            family.append(pattern)
    return family


class PropertySpec:
    def __init__(self, kind: PropertyKind, patterns=()):
        self.kind = PropertyKind(kind)
        patterns = tuple(patterns)
        if self.kind == PropertyKind.forbidden_family:
            if not patterns:
                raise BadSpec("Forbidden family must not be empty")
            for pattern in patterns:
                if pattern.k < 2:
                    raise BadSpec(f"Forbidden patterns need k >= 2, got {pattern}")
        self._patterns = patterns

    def __repr__(self):
        if self.kind == PropertyKind.threshold:
            return "PropertySpec(threshold)"
        return f"PropertySpec(forbidden_family, {len(self._patterns)} patterns)"

    @classmethod
    def threshold(cls):
        return cls(PropertyKind.threshold)

    @classmethod
    def forbidden(cls, patterns):
        return cls(PropertyKind.forbidden_family, patterns)

    @property
    def patterns(self) -> tuple[PatternGraph, ...]:
        if self.kind == PropertyKind.threshold:
            return tuple(threshold_family())
        return self._patterns

    def as_family(self) -> "PropertySpec":
        return PropertySpec.forbidden(self.patterns)


def read_graph(path) -> OrderedGraph:
    lines = [
        line.strip()
        for line in Path(path).read_text().splitlines()
        if line.strip() and not line.startswith("#")
    ]
    if not lines or not lines[0].startswith("n="):
        raise BadGraph(f"{path}: first line must be 'n=<int>'")
    n = int(lines[0][2:])
    edges = []
    for line in lines[1:]:
        i, j = (int(s) for s in line.split())
        if not i < j:
            raise BadGraph(f"{path}: edge lines must satisfy i < j, got '{line}'")
        edges.append((i, j))
    return OrderedGraph.from_edges(n, edges)


def write_graph(graph: OrderedGraph, path):
    lines = [f"n={graph.n}"] + [f"{i} {j}" for i, j in graph.edges()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_pattern(path) -> PatternGraph:
    return PatternGraph.from_graph(read_graph(path))


def read_family(path) -> PropertySpec:
    data = json.loads(Path(path).read_text())
    patterns = [PatternGraph(p["k"], [tuple(e) for e in p["edges"]]) for p in data["patterns"]]
    return PropertySpec.forbidden(patterns)


def write_family(spec: PropertySpec, path):
    data = {"patterns": [{"k": p.k, "edges": [list(e) for e in p.edges]} for p in spec.patterns]}
    Path(path).write_text(json.dumps(data, indent=2))
