import json
import math
import dataclasses
import numpy as np
import pandas as pd
from pathlib import Path
from functools import partial
from dataclasses import dataclass
from tqdm import tqdm
from tqdm.contrib.concurrent import process_map

from .base import Global, log, seed_path, ConfigError
from .graph import PatternGraph, PropertySpec, odd_clique
from .grid import embed, odd_clique_limit, constant_orderon
from .density import pattern_distribution_graph, pattern_distribution_orderon
from .sampling import SbmSpec, gnp, sbm_consecutive, sample_graph
from .csdist import cs_upper
from .hereditary import (
    dist_threshold,
    extremal_graph,
    nearest_threshold_graph,
    removal_tester,
    estimate_parameter,
    edge_density,
    threshold_distance,
    QUANTILES,
)
from .report import Report

NAMES = ("odd-clique", "furthest", "sampling-decay", "estimability", "tester")

DEFAULTS = {
    "odd-clique": dict(sizes=(4, 16, 64), k=3),
    "furthest": dict(
        sizes=(2000,),
        probabilities=(0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9),
        trials=5,
        blocks=16,
    ),
    "sampling-decay": dict(sample_sizes=(16, 64, 256), trials=30),
    "estimability": dict(sizes=(2000,), sample_sizes=(50, 100, 200), trials=100, probabilities=(0.5,)),
    "tester": dict(sizes=(2000,), sample_sizes=(10, 20, 30), trials=200, probabilities=(0.5,)),
}


@dataclass
class ExperimentConfig:
    # odd-clique, furthest, sampling-decay, estimability or tester
    name: str = "odd-clique"

    seed: int = 0

    # worker processes; 1 runs in this process
    threads: int = 1

    # graph sizes: n of H_n for odd-clique, vertex count otherwise
    sizes: tuple[int, ...] = ()

    # pattern size for odd-clique
    k: int = 3

    # sample sizes k for sampling-decay, estimability and tester
    sample_sizes: tuple[int, ...] = ()

    # seeds per setting
    trials: int = 0

    # edge probabilities of the G(n, p) graphs
    probabilities: tuple[float, ...] = ()

    # blocks of the staircase stochastic block model
    blocks: int = 16

    # estimated parameter: edge_density or threshold_distance
    parameter: str = "edge_density"

    # estimability input graph: gnp or extremal
    graph: str = "gnp"

    # also write gnuplot .dat tables
    dat: bool = False

    def __post_init__(self):
        if self.name not in NAMES:
            raise ConfigError(f"Unknown experiment '{self.name}', expected one of {NAMES}")
        for key, value in DEFAULTS[self.name].items():
            if not getattr(self, key):
                setattr(self, key, value)
        self.sizes = tuple(int(s) for s in self.sizes)
        self.sample_sizes = tuple(int(s) for s in self.sample_sizes)
        self.probabilities = tuple(float(p) for p in self.probabilities)
        self.validate()

    def validate(self):
        if self.threads < 1:
            raise ConfigError(f"threads must be positive, got {self.threads}")
        if self.seed < 0:
            raise ConfigError(f"seed must be nonnegative, got {self.seed}")
        if any(p < 0 or p > 1 for p in self.probabilities):
            raise ConfigError(f"probabilities must lie in [0, 1], got {self.probabilities}")
        if self.name == "odd-clique" and not 2 <= self.k <= 4:
            raise ConfigError(f"odd-clique needs 2 <= k <= 4, got k={self.k}")
        if self.name == "furthest" and min(self.sizes) < 100:
            raise ConfigError(f"furthest needs n >= 100, got sizes {self.sizes}")
        if self.name in ("estimability", "tester"):
            if max(self.sample_sizes) > min(self.sizes):
                raise ConfigError(
                    f"sample sizes {self.sample_sizes} exceed graph sizes {self.sizes}"
                )
        if self.parameter not in ("edge_density", "threshold_distance"):
            raise ConfigError(f"Unknown parameter '{self.parameter}'")
        if self.graph not in ("gnp", "extremal"):
            raise ConfigError(f"Unknown graph '{self.graph}'")

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"Unknown config keys {unknown}")
        return cls(**data)

    @classmethod
    def load(cls, path):
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: {e}") from e
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def parallel_map(fn, items, threads, desc=None) -> list:
    """Results in input order; process_map when threads > 1."""
    items = list(items)
    disable = Global.VERBOSITY < 3
    if threads <= 1:
        return [fn(x) for x in tqdm(items, desc=desc, disable=disable)]
    return process_map(fn, items, max_workers=threads, chunksize=1, desc=desc, disable=disable)


def odd_clique_patterns(k) -> list[tuple[str, PatternGraph, float]]:
    """(kind, pattern, limit density in W*) for the empty, clique-plus-isolated and a zero-limit pattern."""
    patterns = [("empty", PatternGraph.empty(k), (k + 1) * 2.0**-k)]
    for code in range(1, 2 ** (k * (k - 1) // 2)):
        pattern = PatternGraph.from_code(k, code)
        support = sorted({v for e in pattern.edges for v in e})
        if pattern == PatternGraph.clique_plus_isolated(k, support):
            patterns.append(("clique+isolated", pattern, 2.0**-k))
    if k >= 3:
        patterns.append(("path", PatternGraph(k, [(1, 2), (2, 3)]), 0.0))
    return patterns


def run_odd_clique(config: ExperimentConfig) -> Report:
    k = config.k
    patterns = odd_clique_patterns(k)
    limit = pattern_distribution_orderon(odd_clique_limit(), k)

    rows = []
    for kind, pattern, expected in patterns:
        rows.append(
            {"pattern": pattern.describe(), "kind": kind, "expected": expected, "limit": limit[pattern.code]}
        )
    df = pd.DataFrame(rows)
    for n in config.sizes:
        dist = pattern_distribution_graph(odd_clique(n), k)
        df[f"H_{n}"] = [dist[p.code] for _, p, _ in patterns]
        log(f"odd-clique: H_{n} done", level=2)

    largest = f"H_{max(config.sizes)}"
    checks = {
        "limits_exact": bool((np.abs(df["limit"] - df["expected"]) <= 1e-10).all()),
        "converges_within_0.05": bool((np.abs(df[largest] - df["limit"]) <= 0.05).all()),
    }
    return Report(config.name, config.to_dict(), {"densities": df}, checks)


def _furthest_gnp(job, n, seed):
    p, s = job
    return dist_threshold(gnp(n, p, seed_path(seed, 0, int(round(p * 1000)), s)))[0]


def _furthest_sbm(s, n, spec, seed):
    return dist_threshold(sbm_consecutive(n, spec, seed_path(seed, 1, s)))[0]


def run_furthest(config: ExperimentConfig) -> Report:
    """Distance to the threshold property; checks use the thresholds quoted for n = 2000."""
    spec = SbmSpec.staircase(config.blocks)
    rows = []
    for n in config.sizes:
        jobs = [(p, s) for p in config.probabilities for s in range(config.trials)]
        values = parallel_map(partial(_furthest_gnp, n=n, seed=config.seed), jobs, config.threads, "gnp")
        rows += [
            {"model": "gnp", "n": n, "p": p, "seed": s, "distance": d, "expected": p * (1 - p)}
            for (p, s), d in zip(jobs, values)
        ]
        rows.append(
            {"model": "extremal", "n": n, "p": np.nan, "seed": np.nan,
             "distance": dist_threshold(extremal_graph(n))[0], "expected": 0.5}
        )
        values = parallel_map(
            partial(_furthest_sbm, n=n, spec=spec, seed=config.seed),
            range(config.trials), config.threads, "sbm",
        )
        rows += [
            {"model": "staircase", "n": n, "p": np.nan, "seed": s, "distance": d, "expected": 0.5}
            for s, d in enumerate(values)
        ]
    df = pd.DataFrame(rows)
    summary = (
        df.groupby(["model", "n", "p"], dropna=False)["distance"]
        .agg(["mean", "min", "max"])
        .reset_index()
    )

    gnp_rows = df[df["model"] == "gnp"]
    gnp_mean = gnp_rows.groupby("p")["distance"].mean()
    closest_to_half = min(config.probabilities, key=lambda p: abs(p - 0.5))
    staircase = df[df["model"] == "staircase"]["distance"]
    checks = {
        "gnp_within_0.02": bool((np.abs(gnp_rows["distance"] - gnp_rows["expected"]) <= 0.02).all()),
        "gnp_peak_at_half": bool(gnp_mean.idxmax() == closest_to_half),
        "extremal_at_least_0.48": bool((df[df["model"] == "extremal"]["distance"] >= 0.48).all()),
        "staircase_at_least_0.45": bool(
            (staircase >= 0.45).sum() >= math.ceil(0.8 * config.trials) * len(config.sizes)
        ),
    }
    return Report(config.name, config.to_dict(), {"distances": df, "summary": summary}, checks)


def decay_value(W, k, seed) -> float:
    """min over power-of-two resolutions r <= k of cs_upper(W, embed(G(k, W))) without column moves."""
    U = embed(sample_graph(k, W, seed))
    best = math.inf
    r = 1
    while r <= k:
        value, _ = cs_upper(W, U, r, shift_budget=1.0, seed=seed_path(seed, r), max_displacement=0)
        best = min(best, value)
        r *= 2
    return best


def _decay_job(job, W, seed):
    k, s = job
    return decay_value(W, k, seed_path(seed, k, s))


def run_sampling_decay(config: ExperimentConfig) -> Report:
    jobs = [(k, s) for k in config.sample_sizes for s in range(config.trials)]
    values = parallel_map(partial(_decay_job, W=odd_clique_limit(), seed=config.seed), jobs, config.threads, "W*")
    controls = parallel_map(
        partial(_decay_job, W=constant_orderon(1.0), seed=config.seed), jobs, config.threads, "control"
    )
    per_seed = pd.DataFrame(
        [{"k": k, "seed": s, "value": v, "control": c} for (k, s), v, c in zip(jobs, values, controls)]
    )
    medians = per_seed.groupby("k")[["value", "control"]].median().reset_index()
    log(f"sampling-decay medians: {medians['value'].round(4).tolist()}", level=2)

    checks = {
        "strictly_decreasing": bool((np.diff(medians["value"].to_numpy()) < 0).all()),
        "control_near_zero": bool((per_seed["control"] <= 1 / per_seed["k"] + 1e-9).all()),
    }
    return Report(config.name, config.to_dict(), {"per_seed": per_seed, "medians": medians}, checks)


def _estimate(k, graph, parameter, trials, seed):
    return estimate_parameter(graph, parameter, k, trials, seed_path(seed, k))


def run_estimability(config: ExperimentConfig) -> Report:
    parameter = edge_density() if config.parameter == "edge_density" else threshold_distance()
    rows = []
    for n in config.sizes:
        for p in config.probabilities:
            if config.graph == "gnp":
                graph = gnp(n, p, seed_path(config.seed, n, int(round(p * 1000))))
            else:
                graph = extremal_graph(n)
            reports = parallel_map(
                partial(_estimate, graph=graph, parameter=parameter, trials=config.trials, seed=config.seed),
                config.sample_sizes, config.threads, "estimate",
            )
            for k, report in zip(config.sample_sizes, reports):
                row = {"graph": config.graph, "n": n, "p": p, "k": k, "parameter": str(parameter), "value": report.value}
                row.update({f"q{q}": report.quantiles[q] for q in QUANTILES})
                rows.append(row)
            if config.graph == "extremal":
                break
    df = pd.DataFrame(rows)

    q90 = df.sort_values("k").groupby(["n", "p"])["q0.9"].apply(lambda s: (np.diff(s.to_numpy()) <= 0).all())
    largest = df[df["k"] == max(config.sample_sizes)]
    checks = {
        "q0.9_nonincreasing_in_k": bool(q90.all()),
        "largest_k_q0.9_at_most_0.05": bool((largest["q0.9"] <= 0.05).all()),
    }
    return Report(config.name, config.to_dict(), {"deviations": df}, checks)


def _rejections(k, graph, trials, seed):
    spec = PropertySpec.threshold()
    return sum(
        not removal_tester(graph, spec, k, seed_path(seed, k, t)).member for t in range(trials)
    )


def run_tester(config: ExperimentConfig) -> Report:
    """Threshold property tester on G(n, p) and on its nearest member."""
    rows = []
    for n in config.sizes:
        for p in config.probabilities:
            far = gnp(n, p, seed_path(config.seed, n, int(round(p * 1000))))
            graphs = {"gnp": far, "member": nearest_threshold_graph(far)}
            for label, graph in graphs.items():
                counts = parallel_map(
                    partial(_rejections, graph=graph, trials=config.trials, seed=config.seed),
                    config.sample_sizes, config.threads, label,
                )
                rows += [
                    {"graph": label, "n": n, "p": p, "k": k, "rejections": c,
                     "trials": config.trials, "frequency": c / config.trials}
                    for k, c in zip(config.sample_sizes, counts)
                ]
    df = pd.DataFrame(rows)
    largest = df[(df["graph"] == "gnp") & (df["k"] == max(config.sample_sizes))]
    checks = {
        "members_never_rejected": bool((df[df["graph"] == "member"]["rejections"] == 0).all()),
        "far_rejected_at_least_0.9": bool((largest["frequency"] >= 0.9).all()),
    }
    return Report(config.name, config.to_dict(), {"rejections": df}, checks)


RUNNERS = {
    "odd-clique": run_odd_clique,
    "furthest": run_furthest,
    "sampling-decay": run_sampling_decay,
    "estimability": run_estimability,
    "tester": run_tester,
}


def run_experiment(config: ExperimentConfig) -> Report:
    log(f"running {config.name} (seed {config.seed}, {config.threads} threads)", level=2)
    return RUNNERS[config.name](config)
