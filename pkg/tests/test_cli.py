import json
import pytest

from orderon.graph import OrderedGraph, odd_clique, write_graph, read_graph
from orderon.grid import constant_orderon, odd_clique_limit, save_orderon
from orderon.cli import main


@pytest.fixture
def files(tmp_path):
    write_graph(OrderedGraph.from_edges(2, [(1, 2)]), tmp_path / "edge.txt")
    write_graph(odd_clique(2), tmp_path / "h2.txt")
    write_graph(OrderedGraph.complete(4), tmp_path / "k4.txt")
    write_graph(OrderedGraph.from_edges(4, [(3, 4)]), tmp_path / "bad.txt")
    save_orderon(constant_orderon(0.7), tmp_path / "high.json")
    save_orderon(constant_orderon(0.2), tmp_path / "low.json")
    save_orderon(odd_clique_limit(), tmp_path / "limit.json")
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_density(files, capsys):
    code, out = run(capsys, "density", "--pattern", files / "edge.txt", "--graph", files / "h2.txt")
    assert code == 0
    assert out["value"] == pytest.approx(1 / 8)
    assert out["method"] == "exact"

    code, out = run(
        capsys, "density", "--pattern", files / "edge.txt", "--orderon", files / "high.json",
        "--method", "mc", "--trials", 1000,
    )
    assert code == 0
    assert out["method"] == "monte_carlo" and out["trials"] == 1000


def test_density_needs_one_source(files, capsys):
    code, _ = run(
        capsys, "density", "--pattern", files / "edge.txt",
        "--graph", files / "h2.txt", "--orderon", files / "high.json",
    )
    assert code == 1


def test_cutnorm(files, capsys):
    code, out = run(capsys, "cutnorm", "--a", files / "high.json", "--b", files / "low.json")
    assert code == 0
    assert out["value"] == pytest.approx(0.5)
    assert out["exactness"] == "exact"

    code, out = run(
        capsys, "cutnorm", "--a", files / "high.json", "--b", files / "low.json",
        "--mode", "ordered", "--depth", 1,
    )
    assert out["value"] == pytest.approx(0.25)
    assert out["depth"] == 1


def test_csdist(files, capsys):
    code, out = run(capsys, "csdist", "--a", files / "limit.json", "--b", files / "limit.json")
    assert code == 0
    assert out["upper"] == pytest.approx(0, abs=1e-12)
    assert out["lower"] == 0
    assert out["upper_witness"]["colperm"] == [0, 1, 2, 3]


def test_sample(files, capsys):
    out_dir = files / "samples"
    code, out = run(capsys, "sample", "--gnp", 12, 1.0, "--count", 2, "--out", out_dir)
    assert code == 0
    assert len(out["files"]) == 2
    assert read_graph(out_dir / "sample_1.txt") == OrderedGraph.complete(12)

    code, _ = run(capsys, "sample", "--orderon", files / "limit.json", "--k", 5, "--out", out_dir, "--seed", 3)
    assert code == 0
    assert read_graph(out_dir / "sample_0.txt").n == 5

    code, _ = run(capsys, "sample", "--out", out_dir)
    assert code == 1

    code, out = run(capsys, "sample", "--gnp", 5, 0.0, "--out-dir", files / "other")
    assert code == 0
    assert read_graph(files / "other" / "sample_0.txt") == OrderedGraph.empty(5)


def test_hered(files, capsys):
    code, out = run(capsys, "hered", "--graph", files / "k4.txt")
    assert code == 0
    assert out == {"member": True, "witness": None, "threshold": 4, "sample": None}

    code, out = run(capsys, "hered", "--graph", files / "bad.txt", "--op", "dist")
    assert out["distance"] == pytest.approx(1 / 6)
    assert out["threshold"] == 0

    code, out = run(capsys, "hered", "--graph", files / "bad.txt", "--op", "test", "--k", 4)
    assert out["member"] is False
    assert out["sample"] == [1, 2, 3, 4]

    code, out = run(
        capsys, "hered", "--graph", files / "k4.txt", "--op", "estimate",
        "--k", 2, "--trials", 5, "--parameter", f"pattern:{files / 'edge.txt'}",
    )
    assert code == 0
    # every pair of K4 is an edge: 3/4 with repetition against 1/2 on two vertices
    assert out["deviations"] == [0.25] * 5


def test_hered_forbidden_family(files, capsys):
    (files / "family.json").write_text(json.dumps({"patterns": [{"k": 2, "edges": [[1, 2]]}]}))
    code, out = run(capsys, "hered", "--graph", files / "bad.txt", "--property", f"family:{files / 'family.json'}")
    assert code == 0
    assert out["witness"] == [3, 4]

    code, _ = run(capsys, "hered", "--graph", files / "bad.txt", "--property", "mystery")
    assert code == 1


def test_fk(files, capsys):
    code, out = run(capsys, "fk", "--orderon", files / "limit.json", "--eps", 0.1)
    assert code == 0
    assert out["num_blocks"] == 2
    assert out["residual"] == pytest.approx(0, abs=1e-12)
    assert [r["blocks"] for r in out["rounds"]] == [1, 2]


def test_run_writes_report(files, capsys):
    (files / "config.json").write_text(json.dumps({"sizes": [100], "sample_sizes": [10], "trials": 5}))
    code, out = run(
        capsys, "run", "--name", "tester", "--config", files / "config.json", "--out", files / "results",
    )
    assert code == 0
    manifest = json.loads((files / "results" / "tester" / "manifest.json").read_text())
    assert manifest["config"]["sizes"] == [100]
    assert out["checks"]["members_never_rejected"]


def test_failed_checks_exit_code(files, capsys):
    code, _ = run(
        capsys, "run", "--name", "tester", "--sizes", 100, "--sample-sizes", 10, "--trials", 5,
        "--probabilities", 0.0, "--out", files / "results",
    )
    assert code == 2


def test_bad_config_and_usage(files, capsys):
    (files / "config.json").write_text(json.dumps({"colour": "red"}))
    code, _ = run(capsys, "fk", "--orderon", files / "limit.json", "--config", files / "config.json")
    assert code == 1
    assert main(["nonsense"]) == 1
    assert main(["fk", "--orderon", str(files / "missing.json")]) == 1
