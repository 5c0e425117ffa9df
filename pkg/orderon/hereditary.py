import math
import itertools
import numpy as np
from enum import IntEnum
from dataclasses import dataclass, field

from .base import (
    Global,
    log,
    make_rng,
    binom2,
    check_pattern_size,
    GraphTooLarge,
)
from .graph import OrderedGraph, PatternGraph, PropertyKind, PropertySpec, vertex_pairs
from .grid import StepFunction
from .density import t_graph, t_orderon


@dataclass(frozen=True)
class MembershipVerdict:
    member: bool
    # violating vertices, 1-indexed, increasing
    witness: tuple[int, ...] | None = None
    # longest clique prefix, threshold property members only
    threshold: int | None = None
    # sampled vertices (1-indexed) when the verdict comes from a sample
    sample: tuple[int, ...] | None = None

    def to_dict(self) -> dict:
        return {
            "member": self.member,
            "witness": None if self.witness is None else list(self.witness),
            "threshold": self.threshold,
            "sample": None if self.sample is None else list(self.sample),
        }


def is_member_threshold(graph: OrderedGraph) -> MembershipVerdict:
    """
    Threshold property: no u1 < u2 <= u3 < u4 with u1u2 a non-edge and u3u4 an
    edge. Equivalently the edges all start before the first vertex that closes
    a non-edge.
    """
    n, adj = graph.n, graph.adj
    non_rows, non_cols = np.nonzero(np.triu(~adj, 1))
    # first vertex (1-indexed) that is the later endpoint of a non-edge
    m = int(non_cols.min()) + 1 if len(non_cols) else n + 1

    edge_rows, edge_cols = np.nonzero(np.triu(adj, 1))
    bad = np.flatnonzero(edge_rows + 1 >= m)
    if len(bad) == 0:
        return MembershipVerdict(True, threshold=m - 1)

    u1 = int(non_rows[non_cols == m - 1].min()) + 1
    u3, u4 = int(edge_rows[bad[0]]) + 1, int(edge_cols[bad[0]]) + 1
    witness = (u1, m, u4) if u3 == m else (u1, m, u3, u4)
    return MembershipVerdict(False, witness=witness)


def _combinations(n, k, chunk):
    it = itertools.combinations(range(n), k)
    while True:
        flat = np.fromiter(itertools.chain.from_iterable(itertools.islice(it, chunk)), dtype=np.int64)
        if flat.size == 0:
            return
        yield flat.reshape(-1, k)


def is_member_forbidden(graph: OrderedGraph, spec: PropertySpec) -> MembershipVerdict:
    """Brute force over increasing vertex subsets of every forbidden pattern size."""
    patterns = spec.patterns
    n, adj = graph.n, graph.adj
    sizes = sorted({p.k for p in patterns})

    work = sum(math.comb(n, k) for k in sizes if k <= n)
    if work > Global.FORBIDDEN_SUBSET_BUDGET:
        raise GraphTooLarge(
            f"Checking {len(patterns)} patterns on n={n} visits {work} vertex subsets, "
            f"above the budget of {Global.FORBIDDEN_SUBSET_BUDGET}"
        )

    for k in sizes:
        if k > n:
            continue
        forbidden = np.array(sorted({p.code for p in patterns if p.k == k}), dtype=np.int64)
        pairs = vertex_pairs(k)
        for subsets in _combinations(n, k, Global.DENSITY_CHUNK_SIZE):
            codes = np.zeros(len(subsets), dtype=np.int64)
            for b, (i, j) in enumerate(pairs):
                codes |= adj[subsets[:, i], subsets[:, j]].astype(np.int64) << b
            hits = np.flatnonzero(np.isin(codes, forbidden))
            if len(hits):
                witness = tuple(int(v) + 1 for v in subsets[hits[0]])
                return MembershipVerdict(False, witness=witness)
    return MembershipVerdict(True)


def is_member(graph: OrderedGraph, spec: PropertySpec) -> MembershipVerdict:
    if spec.kind == PropertyKind.threshold:
        return is_member_threshold(graph)
    return is_member_forbidden(graph, spec)


def threshold_costs(graph: OrderedGraph) -> np.ndarray:
    """Edits to reach 'clique on 1..i, no edges inside i+1..n', for i = 0..n."""
    adj = graph.adj
    non_by_later = np.triu(~adj, 1).sum(axis=0)
    edges_by_earlier = np.triu(adj, 1).sum(axis=1)
    prefix_non = np.concatenate([[0], np.cumsum(non_by_later)])
    suffix_edges = np.concatenate([np.cumsum(edges_by_earlier[::-1])[::-1], [0]])
    return prefix_non + suffix_edges


def dist_threshold(graph: OrderedGraph) -> tuple[float, int]:
    """
    Edit distance to the threshold property, normalized by C(n, 2), and the
    threshold index: the membership threshold for members, otherwise the
    smallest minimizing i.
    """
    n = graph.n
    if n < 2:
        raise ValueError(f"dist_threshold needs n >= 2, got n={n}")
    costs = threshold_costs(graph)
    i = int(np.argmin(costs))
    if costs[i] == 0:
        return 0.0, is_member_threshold(graph).threshold
    return float(costs[i]) / binom2(n), i


def nearest_threshold_graph(graph: OrderedGraph) -> OrderedGraph:
    """Closest member: the edits counted by dist_threshold applied to the graph."""
    n = graph.n
    i = int(np.argmin(threshold_costs(graph)))
    adj = graph.adj.copy()
    adj[:i, :i] = True
    adj[i:, i:] = False
    np.fill_diagonal(adj, False)
    return OrderedGraph(adj)


def extremal_graph(n) -> OrderedGraph:
    """u ~ v iff u + v >= n (1-indexed): the graph furthest from the threshold property."""
    if n < 2:
        raise ValueError(f"extremal_graph needs n >= 2, got n={n}")
    i = np.arange(1, n + 1)
    adj = i[:, None] + i[None, :] >= n
    np.fill_diagonal(adj, False)
    return OrderedGraph(adj)


def closure_density_check(W: StepFunction, spec: PropertySpec, k_max: int) -> bool:
    """True iff every forbidden pattern with at most k_max vertices has density 0 in W."""
    check_pattern_size(k_max)
    for pattern in spec.patterns:
        if pattern.k > k_max:
            continue
        if t_orderon(pattern, W).value > Global.TOLERANCE:
            log(f"closure_density_check: {pattern} has positive density", level=3)
            return False
    return True


def sample_vertices(rng, n, k) -> np.ndarray:
    """Uniform k-subset of range(n) without repetition, in increasing order."""
    if not 1 <= k <= n:
        raise ValueError(f"Sample size must lie in [1, {n}], got k={k}")
    return np.sort(rng.choice(n, size=k, replace=False))


def removal_tester(graph: OrderedGraph, spec: PropertySpec, k, seed) -> MembershipVerdict:
    """
    One-sided tester: membership of the subgraph induced by a uniform ordered
    k-subset. The witness is given in the labels of the input graph; the
    threshold refers to the sample.
    """
    vertices = sample_vertices(make_rng(seed), graph.n, k)
    verdict = is_member(graph.induced(vertices), spec)
    witness = None
    if verdict.witness is not None:
        witness = tuple(int(vertices[w - 1]) + 1 for w in verdict.witness)
    return MembershipVerdict(
        member=verdict.member,
        witness=witness,
        threshold=verdict.threshold,
        sample=tuple(int(v) + 1 for v in vertices),
    )


class ParameterKind(IntEnum):
    edge_density = 0
    pattern_density = 1
    threshold_distance = 2

    def __str__(self):
        return self.name

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class GraphParameter:
    kind: ParameterKind
    pattern: PatternGraph | None = None

    def __post_init__(self):
        if self.kind == ParameterKind.pattern_density and self.pattern is None:
            raise ValueError("pattern_density needs a pattern")

    def __str__(self):
        if self.kind == ParameterKind.pattern_density:
            return f"pattern_density({self.pattern.describe()})"
        return str(self.kind)

    def __call__(self, graph: OrderedGraph) -> float:
        if self.kind == ParameterKind.edge_density:
            return graph.edge_density
        if self.kind == ParameterKind.pattern_density:
            return t_graph(self.pattern, graph).value
        return dist_threshold(graph)[0]


def edge_density() -> GraphParameter:
    return GraphParameter(ParameterKind.edge_density)


def pattern_density(pattern: PatternGraph) -> GraphParameter:
    return GraphParameter(ParameterKind.pattern_density, pattern)


def threshold_distance() -> GraphParameter:
    return GraphParameter(ParameterKind.threshold_distance)


QUANTILES = (0.5, 0.9, 0.95, 0.99)


@dataclass(frozen=True, eq=False)
class EstimationReport:
    k: int
    trials: int
    value: float
    deviations: np.ndarray = field(repr=False)
    quantiles: dict

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "trials": self.trials,
            "value": self.value,
            "deviations": self.deviations.tolist(),
            "quantiles": {str(q): v for q, v in self.quantiles.items()},
        }


def estimate_parameter(graph: OrderedGraph, f: GraphParameter, k, trials, seed) -> EstimationReport:
    """|f(G) - f(G|k)| over `trials` samples; trial t uses stream (seed, t)."""
    if trials < 1:
        raise ValueError(f"Estimation needs trials >= 1, got {trials}")
    if f.kind == ParameterKind.pattern_density:
        check_pattern_size(f.pattern.k)
    value = f(graph)
    deviations = np.empty(trials)
    for t in range(trials):
        vertices = sample_vertices(make_rng(seed, t), graph.n, k)
        deviations[t] = abs(value - f(graph.induced(vertices)))
    quantiles = {q: float(np.quantile(deviations, q)) for q in QUANTILES}
    return EstimationReport(k=k, trials=trials, value=value, deviations=deviations, quantiles=quantiles)
