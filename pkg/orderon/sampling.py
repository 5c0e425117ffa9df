import json
import numpy as np
from pathlib import Path

from .base import BadSpec, make_rng, seed_path
from .graph import OrderedGraph, WeightedOrderedGraph
from .grid import StepFunction


class SbmSpec:
    """Stochastic block model: M blocks, symmetric edge probabilities p, block probabilities q."""

    def __init__(self, p, q=None):
        p = np.array(p, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1] or p.shape[0] < 1:
            raise BadSpec(f"p must be a nonempty square matrix, got shape {p.shape}")
        if not np.allclose(p, p.T, rtol=0, atol=1e-12):
            raise BadSpec("p must be symmetric")
        if (p < 0).any() or (p > 1).any():
            raise BadSpec("Entries of p must lie in [0, 1]")
        M = p.shape[0]
        q = np.full(M, 1 / M) if q is None else np.array(q, dtype=float)
        if q.shape != (M,):
            raise BadSpec(f"q must have {M} entries, got shape {q.shape}")
        if (q < 0).any() or abs(q.sum() - 1) > 1e-9:
            raise BadSpec(f"q must be a probability vector, got sum {q.sum()}")
        self.p = p
        self.q = q / q.sum()
        self.p.flags.writeable = False
        self.q.flags.writeable = False

    def __repr__(self):
        return f"SbmSpec(M={self.M})"

    @property
    def M(self) -> int:
        return self.p.shape[0]

    @classmethod
    def staircase(cls, M):
        """p_ij = 1 iff i + j >= M + 1 (1-indexed)."""
        i = np.arange(1, M + 1)
        return cls((i[:, None] + i[None, :] >= M + 1).astype(float))

    @classmethod
    def from_dict(cls, data):
        if "p" not in data:
            raise BadSpec("SBM spec needs a 'p' matrix")
        spec = cls(data["p"], data.get("q"))
        if "M" in data and int(data["M"]) != spec.M:
            raise BadSpec(f"M={data['M']} does not match p of size {spec.M}")
        return spec

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return {"M": self.M, "p": self.p.tolist(), "q": self.q.tolist()}


def sample_points(rng, k, count):
    """k uniform points per sample, sorted by the first coordinate (stable)."""
    z = rng.random((count, k))
    y = rng.random((count, k))
    order = np.argsort(z, axis=1, kind="stable")
    return np.take_along_axis(z, order, axis=1), np.take_along_axis(y, order, axis=1)


def sample_weights(rng, k, W: StepFunction, count) -> np.ndarray:
    x, y = sample_points(rng, k, count)
    cells = W.grid.cell_index(x, y)
    return W.values[cells[:, :, None], cells[:, None, :]]


def sample_adjacency(rng, k, W: StepFunction, count) -> np.ndarray:
    """A batch of G(k, W) adjacency matrices, shape (count, k, k)."""
    weights = sample_weights(rng, k, W, count)
    coins = rng.random((count, k, k))
    upper = np.triu(coins < weights, 1)
    return upper | upper.transpose(0, 2, 1)


def sample_graph(k, W: StepFunction, seed) -> OrderedGraph:
    if k < 1:
        raise ValueError(f"Sample size must be positive, got k={k}")
    return OrderedGraph(sample_adjacency(make_rng(seed), k, W, 1)[0])


def sample_weighted(k, W: StepFunction, seed) -> WeightedOrderedGraph:
    """H(k, W); the diagonal is set to 0."""
    if k < 1:
        raise ValueError(f"Sample size must be positive, got k={k}")
    weights = sample_weights(make_rng(seed), k, W, 1)[0]
    np.fill_diagonal(weights, 0.0)
    return WeightedOrderedGraph(weights)


def sample_graphs(k, W: StepFunction, seed, count) -> list[OrderedGraph]:
    """count samples; sample i uses stream (seed, i)."""
    return [sample_graph(k, W, seed_path(seed, i)) for i in range(count)]


def _random_graph(rng, probs) -> np.ndarray:
    n = probs.shape[0]
    upper = np.triu(rng.random((n, n)) < probs, 1)
    return upper | upper.T


def gnp(n, p, seed) -> OrderedGraph:
    if not 0 <= p <= 1:
        raise ValueError(f"Edge probability must lie in [0, 1], got {p}")
    if n < 1:
        raise ValueError(f"Graph must have at least one vertex, got n={n}")
    rng = make_rng(seed)
    return OrderedGraph(_random_graph(rng, np.full((n, n), float(p))))


def _block_sizes(rng, n, spec: SbmSpec, exact_sizes) -> np.ndarray:
    if not exact_sizes:
        return rng.multinomial(n, spec.q)
    # largest remainder rounding of n * q
    raw = n * spec.q
    sizes = np.floor(raw).astype(np.int64)
    order = np.argsort(-(raw - sizes), kind="stable")
    sizes[order[: n - sizes.sum()]] += 1
    return sizes


def consecutive_blocks(n, spec: SbmSpec, seed, exact_sizes=False) -> np.ndarray:
    """Block sizes drawn by sbm_consecutive for the same arguments."""
    return _block_sizes(make_rng(seed), n, spec, exact_sizes)


def sbm_consecutive(n, spec: SbmSpec, seed, exact_sizes=False) -> OrderedGraph:
    """
    Vertices fall independently into block i with probability q_i (or exactly
    round(n q_i) of them with exact_sizes); blocks occupy consecutive ranges.
    """
    if n < 1:
        raise ValueError(f"Graph must have at least one vertex, got n={n}")
    rng = make_rng(seed)
    sizes = _block_sizes(rng, n, spec, exact_sizes)
    labels = np.repeat(np.arange(spec.M), sizes)
    probs = spec.p[labels[:, None], labels[None, :]]
    return OrderedGraph(_random_graph(rng, probs))
