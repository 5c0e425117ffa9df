import math
import numpy as np
from dataclasses import dataclass

from .base import Global, log, make_rng, draw_seed, BadPartition, EmptyBlock
from .grid import StepFunction, StepKernel
from .norms import NormCertificate, cut_norm


class CellPartition:
    """Partition of the cells of one grid into blocks; block b holds the cells labelled b."""

    def __init__(self, labels):
        labels = np.asarray(labels)
        if labels.ndim != 1 or len(labels) == 0:
            raise BadPartition("Partition labels must be a nonempty vector")
        if not np.issubdtype(labels.dtype, np.integer) or labels.min() < 0:
            raise BadPartition("Partition labels must be nonnegative integers")
        # relabel blocks by first appearance
        _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
        order = np.argsort(np.argsort(first, kind="stable"), kind="stable")
        self.labels = order[np.asarray(inverse).ravel()]
        self.labels.flags.writeable = False

    def __repr__(self):
        return f"CellPartition(cells={self.num_cells}, blocks={self.num_blocks})"

    def __eq__(self, other):
        return isinstance(other, CellPartition) and np.array_equal(self.labels, other.labels)

    @classmethod
    def from_blocks(cls, blocks, num_cells):
        labels = np.full(num_cells, -1, dtype=np.int64)
        for b, block in enumerate(blocks):
            block = np.asarray(block, dtype=np.int64)
            if len(block) == 0:
                raise EmptyBlock(f"Block {b} is empty")
            if (block < 0).any() or (block >= num_cells).any():
                raise BadPartition(f"Block {b} refers to cells outside 0..{num_cells - 1}")
            if (labels[block] >= 0).any():
                raise BadPartition(f"Block {b} overlaps an earlier block")
            labels[block] = b
        if (labels < 0).any():
            raise BadPartition(f"Blocks miss cells {np.flatnonzero(labels < 0).tolist()}")
        return cls(labels)

    @classmethod
    def trivial(cls, num_cells):
        return cls(np.zeros(num_cells, dtype=np.int64))

    @classmethod
    def singletons(cls, num_cells):
        return cls(np.arange(num_cells))

    @property
    def num_cells(self) -> int:
        return len(self.labels)

    @property
    def num_blocks(self) -> int:
        return int(self.labels.max()) + 1

    @property
    def blocks(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.labels == b) for b in range(self.num_blocks)]

    def membership(self) -> np.ndarray:
        onehot = np.zeros((self.num_cells, self.num_blocks))
        onehot[np.arange(self.num_cells), self.labels] = 1.0
        return onehot

    def split(self, *subsets) -> "CellPartition":
        """Common refinement with the given cell subsets."""
        keys = self.labels.astype(np.int64)
        for subset in subsets:
            inside = np.zeros(self.num_cells, dtype=np.int64)
            inside[list(subset)] = 1
            keys = keys * 2 + inside
        return CellPartition(keys)

    def to_dict(self) -> dict:
        return {"blocks": [b.tolist() for b in self.blocks]}


def stepping(W: StepFunction, P: CellPartition):
    """W_P: every block pair carries the measure-weighted average of W over it."""
    if P.num_cells != W.num_cells:
        raise BadPartition(f"Partition covers {P.num_cells} cells, orderon has {W.num_cells}")
    lam = W.grid.cell_measure
    onehot = P.membership()
    mass = onehot.T @ lam
    if (mass <= 0).any():
        raise EmptyBlock(f"Blocks {np.flatnonzero(mass <= 0).tolist()} have zero measure")
    block_sum = onehot.T @ (lam[:, None] * W.values * lam[None, :]) @ onehot
    averages = block_sum / np.outer(mass, mass)
    return type(W)(W.grid, averages[np.ix_(P.labels, P.labels)])


def energy(W: StepFunction) -> float:
    lam = W.grid.cell_measure
    return float(lam @ W.values**2 @ lam)


@dataclass(frozen=True)
class FkRound:
    partition: CellPartition
    # |integral of W - W_P| over the witness found this round
    violation: float
    energy: float
    certificate: NormCertificate


def block_cap(eps, num_cells) -> int:
    exponent = math.ceil(1 / eps**2) + 3
    if exponent >= num_cells.bit_length():
        return num_cells
    return min(2**exponent, num_cells)


def fk_rounds(W: StepFunction, eps, seed=0):
    """
    Weak regularity refinement: starting from one block, find S, T with a large
    |integral of W - W_P over S x T| and split every block by S and by T.
    Stops once the violation is at most eps, once a refinement fails to lower
    the violation (that refinement is dropped), or before the block count would
    pass min(2^(ceil(1/eps^2) + 3), number of cells). Yielded violations
    strictly decrease.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    cap = block_cap(eps, W.num_cells)
    rng = make_rng(seed)
    P = CellPartition.trivial(W.num_cells)
    previous = math.inf
    while True:
        WP = stepping(W, P)
        D = StepKernel(W.grid, W.values - WP.values)
        cert = cut_norm(D, Global.FK_EXACT_MAX_CELLS, seed=draw_seed(rng))
        log(
            f"fk: {P.num_blocks} blocks, violation {cert.value:.6f} ({cert.exactness})",
            level=3,
        )
        if cert.value >= previous:
            log(f"fk: violation did not decrease ({cert.value:.6f} >= {previous:.6f}), stopping", level=3)
            return
        previous = cert.value
        yield FkRound(P, cert.value, energy(WP), cert)
        if cert.value <= eps:
            return
        refined = P.split(cert.witness_s, cert.witness_t)
        if refined.num_blocks > cap or refined.num_blocks == P.num_blocks:
            return
        P = refined


def fk_partition(W: StepFunction, eps, seed=0) -> tuple[CellPartition, float]:
    """Final partition of fk_rounds and its residual (exact or a heuristic lower bound)."""
    last = None
    for last in fk_rounds(W, eps, seed):
        pass
    return last.partition, last.violation
