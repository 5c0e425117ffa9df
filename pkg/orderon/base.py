import os
import sys
import math
import numpy as np


class Global:
    VERBOSITY = int(os.environ.get("ORDERON_VERBOSITY", 2))

    # Pattern size cap for exact density enumeration
    K_MAX = 6

    # Cut norm search
    EXACT_CUT_MAX_CELLS = 24  # 2^m subset enumeration
    CS_EXACT_MAX_CELLS = 14  # exact norm inside the cut-shift search loop
    FK_EXACT_MAX_CELLS = 16  # exact norm inside the regularity loop
    ORDERED_EXACT_MAX_CELLS = 16
    ORDERED_MAX_CELLS = 4096
    HEURISTIC_RESTARTS = 32
    SUBSET_CHUNK_SIZE = 2**16

    # Cut-shift search
    SHIFT_EXHAUSTIVE_MAX_RESOLUTION = 10
    SHIFT_EXHAUSTIVE_MAX_PERMUTATIONS = 5000
    ANNEALING_STEPS = 200
    ANNEALING_START_TEMPERATURE = 0.05
    ANNEALING_COOLING = 0.97

    # Counting
    DENSITY_CHUNK_SIZE = 2**16
    MONTE_CARLO_CHUNK_SIZE = 4096
    FORBIDDEN_SUBSET_BUDGET = 10**7

    TOLERANCE = 1e-12

    @classmethod
    def clear(cls):
        cls.VERBOSITY = int(os.environ.get("ORDERON_VERBOSITY", 2))

        cls.K_MAX = 6

        cls.EXACT_CUT_MAX_CELLS = 24
        cls.CS_EXACT_MAX_CELLS = 14
        cls.FK_EXACT_MAX_CELLS = 16
        cls.ORDERED_EXACT_MAX_CELLS = 16
        cls.ORDERED_MAX_CELLS = 4096
        cls.HEURISTIC_RESTARTS = 32
        cls.SUBSET_CHUNK_SIZE = 2**16

        cls.SHIFT_EXHAUSTIVE_MAX_RESOLUTION = 10
        cls.SHIFT_EXHAUSTIVE_MAX_PERMUTATIONS = 5000
        cls.ANNEALING_STEPS = 200
        cls.ANNEALING_START_TEMPERATURE = 0.05
        cls.ANNEALING_COOLING = 0.97

        cls.DENSITY_CHUNK_SIZE = 2**16
        cls.MONTE_CARLO_CHUNK_SIZE = 4096
        cls.FORBIDDEN_SUBSET_BUDGET = 10**7

        cls.TOLERANCE = 1e-12


class Colors:
    red = "\033[91m"
    blue = "\033[94m"
    yellow = "\033[93m"
    green = "\033[92m"
    endc = "\033[0m"


def log(*args, level=3):
    # 1 - Error
    # 2 - Info
    # 3 - Debug
    if level <= Global.VERBOSITY:
        file = sys.stderr
        if level == 1:
            print(f"{Colors.red}Error{Colors.endc}:", *args, file=file)
        else:
            print(*args, file=file)


class OrderonError(ValueError):
    pass


class BadGraph(OrderonError):
    pass


class BadBreakpoints(OrderonError):
    pass


class AsymmetricValues(OrderonError):
    pass


class OutOfRangeValue(OrderonError):
    pass


class PatternTooLarge(OrderonError):
    pass


class TooManyCells(OrderonError):
    pass


class DepthTooLarge(OrderonError):
    pass


class IncompatibleResolution(OrderonError):
    pass


class BadShiftMap(OrderonError):
    pass


class BadSpec(OrderonError):
    pass


class BadPartition(OrderonError):
    pass


class EmptyBlock(OrderonError):
    pass


class GraphTooLarge(OrderonError):
    pass


class ConfigError(OrderonError):
    pass


class ExperimentCheckFailed(AssertionError):
    pass


def seed_sequence(seed) -> np.random.SeedSequence:
    """
    Stream for `seed` = int or tuple (seed, i, j, ...).
    (seed, i, j, ...) maps to SeedSequence(entropy=seed, spawn_key=(i, j, ...)).
    """
    if isinstance(seed, (tuple, list)):
        if not seed:
            raise ValueError("Seed tuple must not be empty")
        entropy, path = int(seed[0]), tuple(int(s) for s in seed[1:])
    else:
        entropy, path = int(seed), ()
    if entropy < 0 or any(s < 0 for s in path):
        raise ValueError(f"Seeds must be nonnegative, got {seed}")
    return np.random.SeedSequence(entropy=entropy, spawn_key=path)


def seed_path(seed, *path) -> tuple:
    base = tuple(seed) if isinstance(seed, (tuple, list)) else (seed,)
    return base + tuple(path)


def make_rng(seed, *path) -> np.random.Generator:
    if path:
        seed = seed_path(seed, *path)
    return np.random.Generator(np.random.Philox(seed_sequence(seed)))


def draw_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**63 - 1))


def binom2(n: int) -> int:
    return n * (n - 1) // 2


def check_pattern_size(k: int):
    if k > Global.K_MAX:
        raise PatternTooLarge(
            f"Pattern size k={k} exceeds k_max={Global.K_MAX}; "
            f"raise Global.K_MAX to count larger patterns"
        )


def counting_constant(k: int) -> float:
    return 6 * math.factorial(k) * binom2(k)
