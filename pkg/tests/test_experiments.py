import json
import numpy as np
import pandas as pd
import pytest

from orderon.base import ConfigError
from orderon.grid import constant_orderon
from orderon.experiments import (
    ExperimentConfig,
    parallel_map,
    odd_clique_patterns,
    decay_value,
    run_experiment,
)
from orderon.report import write_report


def test_config_defaults():
    config = ExperimentConfig(name="furthest")
    assert config.sizes == (2000,)
    assert config.trials == 5
    assert len(config.probabilities) == 9
    assert ExperimentConfig(name="odd-clique", sizes=[4, 8]).sizes == (4, 8)


@pytest.mark.parametrize(
    "overrides",
    [
        {"name": "nope"},
        {"name": "odd-clique", "k": 6},
        {"name": "furthest", "sizes": (50,)},
        {"name": "tester", "sizes": (20,), "sample_sizes": (30,)},
        {"name": "estimability", "parameter": "volume"},
        {"name": "tester", "probabilities": (1.5,)},
        {"name": "tester", "threads": 0},
    ],
)
def test_config_errors(overrides):
    with pytest.raises(ConfigError):
        ExperimentConfig(**overrides)


def test_config_files(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"name": "tester", "sizes": [100], "seed": 3}))
    config = ExperimentConfig.load(path)
    assert config.sizes == (100,) and config.seed == 3
    assert ExperimentConfig.from_dict(config.to_dict()) == config

    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"name": "tester", "colour": "red"})
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        ExperimentConfig.load(path)


def test_parallel_map_keeps_order():
    assert parallel_map(abs, [-1, 2, -3], 1) == [1, 2, 3]
    assert parallel_map(abs, [-1, 2, -3], 2) == [1, 2, 3]


def test_odd_clique_patterns():
    kinds = [kind for kind, _, _ in odd_clique_patterns(3)]
    # empty, three single edges, the triangle and the path
    assert kinds.count("clique+isolated") == 4
    assert kinds[0] == "empty" and kinds[-1] == "path"
    assert [kind for kind, _, _ in odd_clique_patterns(2)] == ["empty", "clique+isolated"]


def test_odd_clique_experiment():
    report = run_experiment(ExperimentConfig(name="odd-clique"))
    assert report.passed
    df = report.tables["densities"]
    assert list(df.columns) == ["pattern", "kind", "expected", "limit", "H_4", "H_16", "H_64"]


@pytest.mark.parametrize("k", [2, 4])
def test_odd_clique_converges_for_other_sizes(k):
    report = run_experiment(ExperimentConfig(name="odd-clique", k=k, sizes=(64,)))
    assert report.checks == {"limits_exact": True, "converges_within_0.05": True}
    df = report.tables["densities"]
    assert (abs(df["H_64"] - df["limit"]) <= 0.05).all()


def test_control_decay_is_at_most_one_over_k():
    for k in (4, 8, 16):
        assert decay_value(constant_orderon(1.0), k, 0) <= 1 / k + 1e-9


def test_sampling_decay_experiment():
    report = run_experiment(ExperimentConfig(name="sampling-decay", sample_sizes=(4, 8), trials=2))
    assert report.checks["control_near_zero"]
    assert len(report.tables["per_seed"]) == 4
    assert report.tables["medians"]["k"].tolist() == [4, 8]


def test_sampling_decay_medians_decrease():
    config = ExperimentConfig(name="sampling-decay", sample_sizes=(16, 64, 256), trials=30, threads=4)
    report = run_experiment(config)
    assert report.checks["strictly_decreasing"]
    assert report.checks["control_near_zero"]
    medians = report.tables["medians"]
    assert medians["k"].tolist() == [16, 64, 256]
    assert (medians["value"].diff().dropna() < 0).all()


def test_furthest_experiment():
    config = ExperimentConfig(name="furthest", sizes=(200,), probabilities=(0.3, 0.5), trials=2, blocks=8)
    report = run_experiment(config)
    df = report.tables["distances"]
    assert sorted(df["model"].unique()) == ["extremal", "gnp", "staircase"]
    assert len(df[df["model"] == "gnp"]) == 4
    assert (df["distance"] >= 0).all()
    assert set(report.checks) == {
        "gnp_within_0.02",
        "gnp_peak_at_half",
        "extremal_at_least_0.48",
        "staircase_at_least_0.45",
    }


def test_estimability_experiment():
    config = ExperimentConfig(name="estimability", sizes=(300,), sample_sizes=(20, 60), trials=50)
    report = run_experiment(config)
    assert report.passed
    df = report.tables["deviations"]
    assert {"q0.5", "q0.9", "q0.95", "q0.99"} <= set(df.columns)
    assert (df["q0.5"] <= df["q0.99"]).all()


def test_tester_experiment():
    config = ExperimentConfig(name="tester", sizes=(300,), sample_sizes=(10, 30), trials=20)
    report = run_experiment(config)
    assert report.passed
    df = report.tables["rejections"]
    assert (df[df["graph"] == "member"]["rejections"] == 0).all()


def test_failing_checks_are_reported():
    config = ExperimentConfig(name="tester", sizes=(100,), sample_sizes=(10,), trials=5, probabilities=(0.0,))
    report = run_experiment(config)
    assert report.failed_checks() == ["far_rejected_at_least_0.9"]


def test_written_report(tmp_path):
    config = ExperimentConfig(name="tester", sizes=(100,), sample_sizes=(10,), trials=5)
    report = run_experiment(config)
    folder = write_report(report, tmp_path, dat=True)
    assert folder == tmp_path / "tester"
    manifest = json.loads((folder / "manifest.json").read_text())
    assert manifest["config"]["sizes"] == [100]
    assert manifest["tables"] == ["rejections"]
    assert manifest["passed"] == report.passed
    df = pd.read_csv(folder / "rejections.csv")
    assert np.array_equal(df["rejections"], report.tables["rejections"]["rejections"])
    assert (folder / "rejections.dat").read_text().startswith("# graph n p k")
