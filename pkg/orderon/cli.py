import json
import dataclasses
from pathlib import Path
from typing import Annotated, Literal, Optional, Union
from dataclasses import dataclass

import tyro

from .base import Global, log, seed_path, ConfigError, ExperimentCheckFailed
from .graph import PropertySpec, read_graph, read_pattern, read_family, write_graph
from .grid import embed, load_orderon, difference
from .density import t_graph, t_orderon, t_montecarlo
from .norms import cut_norm_exact, cut_norm_heuristic, cut_norm_upper, ordered_cut_norm
from .csdist import cs_bounds
from .sampling import SbmSpec, sample_graph, gnp, sbm_consecutive
from .hereditary import (
    is_member,
    dist_threshold,
    removal_tester,
    estimate_parameter,
    edge_density,
    pattern_density,
    threshold_distance,
)
from .regularity import fk_rounds
from .experiments import ExperimentConfig, run_experiment
from .report import dumps, write_report


@dataclass(kw_only=True)
class Common:
    # root seed of every random stream
    seed: int = 0

    # output directory
    out: Annotated[Path, tyro.conf.arg(aliases=("--out-dir",))] = Path("results")

    # worker processes
    threads: int = 1

    # JSON file whose keys override the arguments of the subcommand
    config: Optional[Path] = None

    # 1 errors, 2 info, 3 debug
    verbosity: int = 2


@dataclass(kw_only=True)
class Density(Common):
    """Density of an ordered pattern in a graph or an orderon."""

    # pattern in the edge-list format
    pattern: Path

    graph: Optional[Path] = None

    orderon: Optional[Path] = None

    method: Literal["exact", "mc"] = "exact"

    # Monte-Carlo trials
    trials: int = 10000


@dataclass(kw_only=True)
class Cutnorm(Common):
    """Cut norm of the difference of two orderons."""

    a: Path
    b: Path
    mode: Literal["exact", "heuristic", "ordered", "upper"] = "exact"

    # sub-column depth of the ordered norm
    depth: int = 0

    restarts: Optional[int] = None


@dataclass(kw_only=True)
class Csdist(Common):
    """Upper and lower bounds on the cut-shift distance."""

    a: Path
    b: Path
    resolution: int = 4

    # largest allowed horizontal displacement
    budget: float = 0.25

    # largest pattern size of the lower bound
    kmax: int = 3

    max_displacement: Optional[int] = None


@dataclass(kw_only=True)
class Sample(Common):
    """Random ordered graphs written in the edge-list format."""

    orderon: Optional[Path] = None

    # n p of an Erdos-Renyi graph
    gnp: Optional[tuple[int, float]] = None

    # stochastic block model spec (JSON)
    sbm: Optional[Path] = None

    # vertex count for orderon and sbm sources
    k: int = 16

    count: int = 1

    # exactly round(n q_i) vertices per block
    exact_sizes: bool = False


@dataclass(kw_only=True)
class Hered(Common):
    """Hereditary property checks on a graph."""

    graph: Path

    # threshold, or family:<file> for a forbidden family
    property: str = "threshold"

    op: Literal["member", "dist", "test", "estimate"] = "member"

    # sample size for test and estimate
    k: int = 30

    trials: int = 100

    # edge_density, threshold_distance or pattern:<file>
    parameter: str = "edge_density"


@dataclass(kw_only=True)
class Fk(Common):
    """Weak regularity partition of an orderon."""

    orderon: Path
    eps: float = 0.3


@dataclass(kw_only=True)
class Run(Common):
    """Run an experiment and write its report."""

    # odd-clique, furthest, sampling-decay, estimability or tester
    name: str = "odd-clique"

    sizes: tuple[int, ...] = ()
    k: int = 3
    sample_sizes: tuple[int, ...] = ()
    trials: int = 0
    probabilities: tuple[float, ...] = ()
    blocks: int = 16
    parameter: str = "edge_density"
    graph: str = "gnp"

    # also write gnuplot .dat tables
    dat: bool = False


Command = Union[
    Annotated[Density, tyro.conf.subcommand("density")],
    Annotated[Cutnorm, tyro.conf.subcommand("cutnorm")],
    Annotated[Csdist, tyro.conf.subcommand("csdist")],
    Annotated[Sample, tyro.conf.subcommand("sample")],
    Annotated[Hered, tyro.conf.subcommand("hered")],
    Annotated[Fk, tyro.conf.subcommand("fk")],
    Annotated[Run, tyro.conf.subcommand("run")],
]


def apply_config(args):
    if args.config is None:
        return args
    data = json.loads(Path(args.config).read_text())
    fields = {f.name: f for f in dataclasses.fields(args)}
    unknown = sorted(set(data) - set(fields) - {"config"})
    if unknown:
        raise ConfigError(f"{args.config}: unknown keys {unknown} for {type(args).__name__.lower()}")
    for key, value in data.items():
        if "Path" in str(fields[key].type) and value is not None:
            data[key] = Path(value)
        elif isinstance(value, list):
            data[key] = tuple(value)
    return dataclasses.replace(args, **data)


def emit(obj):
    print(dumps(obj))


def density(args: Density) -> int:
    pattern = read_pattern(args.pattern)
    if (args.graph is None) == (args.orderon is None):
        raise ConfigError("density needs exactly one of --graph and --orderon")
    if args.orderon is not None:
        W = load_orderon(args.orderon)
    if args.method == "mc":
        target = W if args.orderon is not None else embed(read_graph(args.graph))
        emit(t_montecarlo(pattern, target, args.trials, args.seed))
    elif args.orderon is not None:
        emit(t_orderon(pattern, W))
    else:
        emit(t_graph(pattern, read_graph(args.graph)))
    return 0


def cutnorm(args: Cutnorm) -> int:
    D = difference(load_orderon(args.a), load_orderon(args.b))
    if args.mode == "exact":
        emit(cut_norm_exact(D))
    elif args.mode == "heuristic":
        emit(cut_norm_heuristic(D, args.restarts, args.seed))
    elif args.mode == "ordered":
        emit(ordered_cut_norm(D, args.depth, args.seed, args.restarts))
    else:
        emit(cut_norm_upper(D))
    return 0


def csdist(args: Csdist) -> int:
    bounds = cs_bounds(
        load_orderon(args.a),
        load_orderon(args.b),
        args.resolution,
        args.budget,
        args.kmax,
        args.seed,
        args.max_displacement,
    )
    emit(bounds)
    return 0


def sample(args: Sample) -> int:
    sources = [args.orderon, args.gnp, args.sbm]
    if sum(s is not None for s in sources) != 1:
        raise ConfigError("sample needs exactly one of --orderon, --gnp and --sbm")
    if args.orderon is not None:
        W = load_orderon(args.orderon)
        draw = lambda seed: sample_graph(args.k, W, seed)
    elif args.gnp is not None:
        n, p = args.gnp
        draw = lambda seed: gnp(n, p, seed)
    else:
        spec = SbmSpec.load(args.sbm)
        draw = lambda seed: sbm_consecutive(args.k, spec, seed, args.exact_sizes)

    args.out.mkdir(parents=True, exist_ok=True)
    files = []
    for i in range(args.count):
        path = args.out / f"sample_{i}.txt"
        write_graph(draw(seed_path(args.seed, i)), path)
        files.append(path)
    log(f"sample: wrote {len(files)} graphs to {args.out}", level=2)
    emit({"files": files})
    return 0


def parse_property(text) -> PropertySpec:
    if text == "threshold":
        return PropertySpec.threshold()
    if text.startswith("family:"):
        return read_family(text[len("family:"):])
    raise ConfigError(f"Unknown property '{text}', expected threshold or family:<file>")


def parse_parameter(text):
    if text == "edge_density":
        return edge_density()
    if text == "threshold_distance":
        return threshold_distance()
    if text.startswith("pattern:"):
        return pattern_density(read_pattern(text[len("pattern:"):]))
    raise ConfigError(f"Unknown parameter '{text}'")


def hered(args: Hered) -> int:
    graph = read_graph(args.graph)
    spec = parse_property(args.property)
    if args.op == "member":
        emit(is_member(graph, spec))
    elif args.op == "dist":
        if args.property != "threshold":
            raise ConfigError("Exact distances are available for the threshold property only")
        distance, threshold = dist_threshold(graph)
        emit({"distance": distance, "threshold": threshold})
    elif args.op == "test":
        emit(removal_tester(graph, spec, args.k, args.seed))
    else:
        emit(estimate_parameter(graph, parse_parameter(args.parameter), args.k, args.trials, args.seed))
    return 0


def fk(args: Fk) -> int:
    rounds = list(fk_rounds(load_orderon(args.orderon), args.eps, args.seed))
    last = rounds[-1]
    emit(
        {
            "blocks": last.partition.to_dict()["blocks"],
            "num_blocks": last.partition.num_blocks,
            "residual": last.violation,
            "exactness": last.certificate.exactness,
            "rounds": [
                {"blocks": r.partition.num_blocks, "violation": r.violation, "energy": r.energy}
                for r in rounds
            ],
        }
    )
    return 0


def run(args: Run) -> int:
    config = ExperimentConfig(
        name=args.name,
        seed=args.seed,
        threads=args.threads,
        sizes=args.sizes,
        k=args.k,
        sample_sizes=args.sample_sizes,
        trials=args.trials,
        probabilities=args.probabilities,
        blocks=args.blocks,
        parameter=args.parameter,
        graph=args.graph,
        dat=args.dat,
    )
    report = run_experiment(config)
    folder = write_report(report, args.out, config.dat)
    emit({"name": report.name, "folder": folder, "checks": report.checks})
    report.require_checks()
    return 0


HANDLERS = {
    Density: density,
    Cutnorm: cutnorm,
    Csdist: csdist,
    Sample: sample,
    Hered: hered,
    Fk: fk,
    Run: run,
}


def main(argv=None) -> int:
    """Exit codes: 0 success, 1 usage or input error, 2 failed experiment checks."""
    try:
        args = tyro.cli(Command, args=argv, prog="orderon-lab")
    except SystemExit as e:
        return 0 if e.code in (0, None) else 1

    try:
        args = apply_config(args)
        Global.VERBOSITY = args.verbosity
        return HANDLERS[type(args)](args)
    except ExperimentCheckFailed as e:
        log(str(e), level=1)
        return 2
    except (ValueError, OSError) as e:
        log(str(e), level=1)
        return 1
