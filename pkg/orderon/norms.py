import numpy as np
from enum import IntEnum
from dataclasses import dataclass

from .base import (
    Global,
    log,
    make_rng,
    TooManyCells,
    DepthTooLarge,
)
from .grid import Grid, StepFunction, difference


class Exactness(IntEnum):
    exact = 0
    lower_bound = 1
    upper_bound = 2

    def __str__(self):
        return self.name

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class NormCertificate:
    value: float
    witness_s: tuple[int, ...]
    witness_t: tuple[int, ...]
    exactness: Exactness
    # set for ordered norms: witnesses refer to the grid with 2^depth sub-columns
    depth: int | None = None


def cell_matrix(D: StepFunction) -> np.ndarray:
    """A[i, j] = measure(i) * D[i, j] * measure(j); the integral over S x T is s @ A @ t."""
    lam = D.grid.cell_measure
    return lam[:, None] * D.values * lam[None, :]


def ordered_weights(grid: Grid) -> np.ndarray:
    """Mass of {v1 <= v2} inside a cell pair: 1 before, 1/2 in the same column, 0 after."""
    col = grid.cell_column
    return (col[:, None] < col[None, :]) + 0.5 * (col[:, None] == col[None, :])


def ordered_grid(D: StepFunction, depth: int) -> Grid:
    return D.grid if depth == 0 else D.grid.subdivide(2**depth)


def ordered_matrix(D: StepFunction, depth: int):
    grid = ordered_grid(D, depth)
    refined = D.refine(grid)
    return grid, cell_matrix(refined) * ordered_weights(grid)


def _indicator(cells, size) -> np.ndarray:
    out = np.zeros(size)
    out[list(cells)] = 1.0
    return out


def witness_value(D: StepFunction, cert: NormCertificate) -> float:
    """Re-evaluate |integral over S x T| for the certificate's witness."""
    if cert.depth is None:
        A = cell_matrix(D)
    else:
        _, A = ordered_matrix(D, cert.depth)
    s = _indicator(cert.witness_s, len(A))
    t = _indicator(cert.witness_t, len(A))
    return float(abs(s @ A @ t))


def ordered_integral(D: StepFunction, depth: int, mu, nu) -> float:
    """Integral of mu(v1) nu(v2) D(v1, v2) 1[v1 <= v2] for weights constant on refined cells."""
    _, A = ordered_matrix(D, depth)
    return float(np.asarray(mu, dtype=float) @ A @ np.asarray(nu, dtype=float))


def twin_groups(values) -> tuple[np.ndarray, int]:
    """Cells with identical value rows collapse into one cell without changing the norm."""
    _, labels = np.unique(np.round(values, 12), axis=0, return_inverse=True)
    labels = np.asarray(labels).ravel()
    return labels, int(labels.max()) + 1


def _merge(A, labels, num_groups) -> np.ndarray:
    onehot = np.zeros((len(labels), num_groups))
    onehot[np.arange(len(labels)), labels] = 1.0
    return onehot.T @ A @ onehot


def _best_response(r) -> tuple[float, int]:
    pos = r[r > 0].sum()
    neg = -r[r < 0].sum()
    return (float(pos), 1) if pos >= neg else (float(neg), -1)


def max_bilinear_exhaustive(A):
    """
    max over s, t in {0,1}^m of |s A t|: every s, best t per column sign.
    The first maximizer in increasing subset order wins.
    """
    m = len(A)
    best, best_index, best_sign = -1.0, 0, 1
    powers = np.arange(m, dtype=np.int64)
    for start in range(0, 2**m, Global.SUBSET_CHUNK_SIZE):
        index = np.arange(start, min(start + Global.SUBSET_CHUNK_SIZE, 2**m), dtype=np.int64)
        subsets = ((index[:, None] >> powers) & 1).astype(float)
        R = subsets @ A
        pos = np.clip(R, 0, None).sum(axis=1)
        neg = np.clip(-R, 0, None).sum(axis=1)
        values = np.maximum(pos, neg)
        i = int(np.argmax(values))
        if values[i] > best:
            best = float(values[i])
            best_index = start + i
            best_sign = 1 if pos[i] >= neg[i] else -1

    s = ((best_index >> powers) & 1).astype(bool)
    r = s.astype(float) @ A
    t = r > 0 if best_sign > 0 else r < 0
    return best, s, t


def climb(A, s):
    """Local search from s: best single flip of s or best s for the current t, until no gain."""
    s = np.asarray(s, dtype=bool).copy()
    r = s.astype(float) @ A
    value, sign = _best_response(r)
    while True:
        R = r[None, :] + np.where(s, -1.0, 1.0)[:, None] * A
        flips = np.maximum(np.clip(R, 0, None).sum(axis=1), np.clip(-R, 0, None).sum(axis=1))
        i = int(np.argmax(flips))

        t = r > 0 if sign > 0 else r < 0
        col = sign * (A @ t.astype(float))
        s_alt = col > 0
        alt = float(col[s_alt].sum())

        if alt > value + 1e-15 and alt >= flips[i]:
            s = s_alt
        elif flips[i] > value + 1e-15:
            s[i] = not s[i]
        else:
            break
        r = s.astype(float) @ A
        value, sign = _best_response(r)

    t = r > 0 if sign > 0 else r < 0
    return value, s, t


def heuristic_search(A, restarts, rng, starts=()):
    """Multistart climb: given starts, then all cells, then `restarts` random subsets."""
    m = len(A)
    best = (-1.0, np.zeros(m, dtype=bool), np.zeros(m, dtype=bool))
    candidates = [np.asarray(s, dtype=bool) for s in starts]
    candidates.append(np.ones(m, dtype=bool))
    for s0 in candidates:
        result = climb(A, s0)
        if result[0] > best[0]:
            best = result
    for _ in range(restarts):
        result = climb(A, rng.random(m) < 0.5)
        if result[0] > best[0]:
            best = result
    return best


def _certificate(A, s, t, exactness, depth=None, value=None) -> NormCertificate:
    if value is None:
        value = float(abs(s.astype(float) @ A @ t.astype(float)))
    return NormCertificate(
        value=value,
        witness_s=tuple(int(i) for i in np.flatnonzero(s)),
        witness_t=tuple(int(i) for i in np.flatnonzero(t)),
        exactness=exactness,
        depth=depth,
    )


def _exact_merged(A, labels, num_groups) -> NormCertificate:
    value, s, t = max_bilinear_exhaustive(_merge(A, labels, num_groups))
    return _certificate(A, s[labels], t[labels], Exactness.exact, value=value)


def cut_norm_exact(D: StepFunction) -> NormCertificate:
    A = cell_matrix(D)
    labels, num_groups = twin_groups(D.values)
    if num_groups > Global.EXACT_CUT_MAX_CELLS:
        raise TooManyCells(
            f"{D.num_cells} cells ({num_groups} distinct rows) exceed the exact cap of "
            f"{Global.EXACT_CUT_MAX_CELLS}; use cut_norm_heuristic"
        )
    return _exact_merged(A, labels, num_groups)


def cut_norm_heuristic(D: StepFunction, restarts=None, seed=0) -> NormCertificate:
    restarts = Global.HEURISTIC_RESTARTS if restarts is None else restarts
    A = cell_matrix(D)
    labels, num_groups = twin_groups(D.values)
    # merged-matrix value, nondecreasing in restarts
    value, s, t = heuristic_search(_merge(A, labels, num_groups), restarts, make_rng(seed))
    return _certificate(A, s[labels], t[labels], Exactness.lower_bound, value=value)


def cut_norm(D: StepFunction, max_exact_cells=None, restarts=None, seed=0) -> NormCertificate:
    """Exact when the distinct rows fit max_exact_cells, heuristic lower bound otherwise."""
    max_exact_cells = Global.EXACT_CUT_MAX_CELLS if max_exact_cells is None else max_exact_cells
    labels, num_groups = twin_groups(D.values)
    if num_groups <= max_exact_cells:
        return _exact_merged(cell_matrix(D), labels, num_groups)
    return cut_norm_heuristic(D, restarts, seed)


def cut_norm_upper(D: StepFunction, max_exact_cells=None) -> NormCertificate:
    """
    Certified upper bound: exact when the distinct rows fit max_exact_cells,
    otherwise max(total positive mass, total negative mass) with empty witnesses.
    """
    max_exact_cells = Global.EXACT_CUT_MAX_CELLS if max_exact_cells is None else max_exact_cells
    A = cell_matrix(D)
    labels, num_groups = twin_groups(D.values)
    if num_groups <= max_exact_cells:
        return _exact_merged(A, labels, num_groups)
    pos = float(A[A > 0].sum())
    neg = float(-A[A < 0].sum())
    return NormCertificate(max(pos, neg), (), (), Exactness.upper_bound)


def ordered_cut_norm(D: StepFunction, depth: int, seed=0, restarts=None) -> NormCertificate:
    """
    Lower bound on the ordered cut norm over unions of cells after splitting
    every column into 2^depth sub-columns. The search climbs depth by depth,
    starting each level from the previous witness, so values never decrease
    with depth.
    """
    if depth < 0:
        raise ValueError(f"Depth must be nonnegative, got {depth}")
    finest = D.num_cells * 2**depth
    if finest > Global.ORDERED_MAX_CELLS:
        raise DepthTooLarge(
            f"Depth {depth} gives {finest} refined cells, above the cap of "
            f"{Global.ORDERED_MAX_CELLS}"
        )
    restarts = Global.HEURISTIC_RESTARTS if restarts is None else restarts
    rng = make_rng(seed)

    prev_grid, prev_s = None, None
    for d in range(depth + 1):
        grid, A = ordered_matrix(D, d)
        if len(A) <= Global.ORDERED_EXACT_MAX_CELLS:
            _, s, t = max_bilinear_exhaustive(A)
        else:
            if prev_s is None:
                unordered = cut_norm(D, seed=seed)
                starts = [
                    _indicator(unordered.witness_s, len(A)),
                    _indicator(unordered.witness_t, len(A)),
                ]
                n_restarts = restarts
            else:
                parent = prev_grid.cell_index(*grid.midpoints())
                starts = [prev_s[parent]]
                n_restarts = min(restarts, 4)
            _, s, t = heuristic_search(A, n_restarts, rng, starts)
        log(f"ordered_cut_norm: depth {d}, {len(A)} cells", level=3)
        prev_grid, prev_s = grid, s

    return _certificate(A, s, t, Exactness.lower_bound, depth=depth)


def l1_distance(W: StepFunction, U: StepFunction) -> float:
    return abs(difference(W, U))
