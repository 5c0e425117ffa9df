import math
import itertools
import numpy as np
from dataclasses import dataclass

from .base import Global, log, make_rng, check_pattern_size, counting_constant
from .graph import PatternGraph
from .grid import StepFunction, difference, refine_to_resolution
from .norms import cut_norm_upper
from .shift import ShiftMap, apply_shift, quantile_map
from .density import pattern_distribution_orderon


@dataclass(frozen=True)
class CsDistanceBounds:
    upper: float
    upper_witness: ShiftMap
    lower: float
    # None when every pattern density agrees
    lower_witness: PatternGraph | None

    def to_dict(self) -> dict:
        lower_witness = None
        if self.lower_witness is not None:
            lower_witness = {"k": self.lower_witness.k, "edges": [list(e) for e in self.lower_witness.edges]}
        return {
            "upper": self.upper,
            "upper_witness": self.upper_witness.to_dict(),
            "lower": self.lower,
            "lower_witness": lower_witness,
        }


def banded_permutations(r, displacement):
    """Permutations p of range(r) with |p[i] - i| <= displacement, in lexicographic order."""
    used = [False] * r

    def extend(prefix):
        i = len(prefix)
        if i == r:
            yield tuple(prefix)
            return
        # the smallest free value must still be reachable from position i
        smallest = used.index(False)
        if smallest < i - displacement:
            return
        for v in range(max(0, i - displacement), min(r, i + displacement + 1)):
            if used[v]:
                continue
            used[v] = True
            prefix.append(v)
            yield from extend(prefix)
            prefix.pop()
            used[v] = False

    yield from extend([])


class _Search:
    """Best shift map seen so far, ranked by (value, column permutation)."""

    def __init__(self, W, U, shift_budget):
        self.W = W
        self.U = U
        self.shift_budget = shift_budget
        self.best_value = math.inf
        self.best_map = None
        self.cache = {}

    def candidates(self, colperm):
        yield ShiftMap(colperm)
        yield quantile_map(self.W, self.U, colperm)

    def evaluate(self, colperm) -> float:
        colperm = tuple(colperm)
        if colperm in self.cache:
            return self.cache[colperm]

        value = math.inf
        for f in self.candidates(colperm):
            cost = f.shift_cost()
            if cost > self.shift_budget + Global.TOLERANCE:
                continue
            D = difference(self.W, apply_shift(self.U, f))
            total = cost + cut_norm_upper(D, Global.CS_EXACT_MAX_CELLS).value
            if total < value:
                value = total
            if (total, colperm) < (self.best_value, self._best_perm()):
                self.best_value, self.best_map = total, f

        self.cache[colperm] = value
        return value

    def _best_perm(self):
        return self.best_map.colperm if self.best_map is not None else ()


def cs_upper(
    W: StepFunction,
    U: StepFunction,
    resolution: int,
    shift_budget: float,
    seed=0,
    max_displacement=None,
) -> tuple[float, ShiftMap]:
    """
    Upper bound on the cut-shift distance: min over searched maps f of
    shift_cost(f) + ||W - U^f|| with a certified upper bound on the norm.
    Searched maps: column permutations at the given resolution that move no
    column further than shift_budget (and max_displacement columns), each with
    the identity and the degree-quantile rearrangement inside the strips.
    """
    if resolution < 1:
        raise ValueError(f"Resolution must be positive, got {resolution}")
    if shift_budget < 0:
        raise ValueError(f"Shift budget must be nonnegative, got {shift_budget}")
    r = resolution
    W = refine_to_resolution(W, r)
    U = refine_to_resolution(U, r)

    displacement = min(r - 1, int(math.floor(shift_budget * r + 1e-9)))
    if max_displacement is not None:
        displacement = min(displacement, max_displacement)

    search = _Search(W, U, shift_budget)
    limit = Global.SHIFT_EXHAUSTIVE_MAX_PERMUTATIONS
    exhaustive = None
    if displacement == 0 or r <= Global.SHIFT_EXHAUSTIVE_MAX_RESOLUTION:
        exhaustive = list(itertools.islice(banded_permutations(r, displacement), limit + 1))
        if len(exhaustive) > limit:
            exhaustive = None

    if exhaustive is not None:
        for colperm in exhaustive:
            search.evaluate(colperm)
    else:
        _anneal(search, r, displacement, make_rng(seed))

    log(
        f"cs_upper: r={r}, displacement {displacement}, "
        f"{len(search.cache)} permutations, best {search.best_value:.6f}",
        level=3,
    )
    return search.best_value, search.best_map


def _anneal(search: _Search, r, displacement, rng):
    perm = list(range(r))
    current = search.evaluate(perm)
    temperature = Global.ANNEALING_START_TEMPERATURE
    for _ in range(Global.ANNEALING_STEPS):
        i = int(rng.integers(r - 1))
        candidate = perm.copy()
        candidate[i], candidate[i + 1] = candidate[i + 1], candidate[i]
        if abs(candidate[i] - i) <= displacement and abs(candidate[i + 1] - i - 1) <= displacement:
            value = search.evaluate(candidate)
            accept = value <= current
            if not accept and math.isfinite(value):
                accept = rng.random() < math.exp(-(value - current) / temperature)
            if accept:
                perm, current = candidate, value
        temperature *= Global.ANNEALING_COOLING


def cs_lower(W: StepFunction, U: StepFunction, k_max=3) -> tuple[float, PatternGraph | None]:
    """
    Lower bound from the counting lemma: every pattern on k vertices has
    |t(F,W) - t(F,U)| <= 6 k! C(k,2) sqrt(distance).
    """
    check_pattern_size(k_max)
    best, witness = 0.0, None
    for k in range(2, k_max + 1):
        gap = np.abs(pattern_distribution_orderon(W, k) - pattern_distribution_orderon(U, k))
        code = int(np.argmax(gap))
        bound = float((gap[code] / counting_constant(k)) ** 2)
        if bound > best:
            best, witness = bound, PatternGraph.from_code(k, code)
    return best, witness


def cs_bounds(W, U, resolution, shift_budget, k_max=3, seed=0, max_displacement=None) -> CsDistanceBounds:
    upper, f = cs_upper(W, U, resolution, shift_budget, seed, max_displacement)
    lower, F = cs_lower(W, U, k_max)
    return CsDistanceBounds(upper=upper, upper_witness=f, lower=lower, lower_witness=F)
