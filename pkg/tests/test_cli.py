import json

import numpy as np
import pytest

from goclust import io
from goclust.cli import main
from goclust.experiment import RESULT_HEADER, load_config, parse_convergence


@pytest.fixture
def data_dir(tmp_path):
    out = tmp_path / "data"
    assert main(["generate", "--seed", "2", "--out", str(out), "--k-star", "5", "--m", "10"]) == 0
    return out


def test_generate_writes_dataset(data_dir):
    d = io.load_dataset(data_dir)
    assert d.n == 15 and d.K_star == 5


def test_cluster_goc_outputs(data_dir, tmp_path, capsys):
    out = tmp_path / "goc.csv"
    rc = main(["cluster", "--in", str(data_dir), "--method", "goc", "--k0", "5", "--lambda", "0.01", "--out", str(out)])
    assert rc == 0
    a = io.read_assignment(out)
    assert a.selected is not None and len(a.labels) == 15
    trace = io.read_trace(tmp_path / "goc.trace.csv")
    assert trace[0]["t"] == 1
    header, rows = io.read_rows(tmp_path / "goc.eta.csv")
    assert header == ["t", "eta1", "eta2", "eta3"] and len(rows) == len(trace)
    assert "nmi " in capsys.readouterr().out


def test_evaluate_prints_scores(data_dir, capsys):
    truth = str(data_dir / "truth.csv")
    assert main(["evaluate", "--pred", truth, "--truth", truth]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out == ["nmi 1.0", "f_measure 1.0", "n_clusters 5"]


def test_ap_command(data_dir, tmp_path):
    out = tmp_path / "ap.csv"
    sim = tmp_path / "sim.csv"
    rc = main(["ap", "--in", str(data_dir), "--kind", "s2", "--quantile", "0.9", "--similarity-out", str(sim), "--out", str(out)])
    assert rc == 0
    assert len(io.read_labels(out)) == 15
    assert io.read_similarity(sim).values.shape == (15, 15)


def test_experiment_command(tmp_path):
    cfg = {
        "datasets": {"generate": {"seeds": [1, 2, 3], "config": {"K_star": 4, "m": 6}}},
        "methods": [
            {"method": "goc", "oracle": "kmeans", "k0": [4], "lambda": [0.0, 0.01]},
            {"method": "baseline", "k0": [4]},
            {"method": "ap", "kind": ["s1"], "quantile": [0.5]},
        ],
        "output_dir": "out",
    }
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(cfg))
    assert main(["experiment", "--config", str(path)]) == 0
    header, rows = io.read_rows(tmp_path / "out" / "results.csv")
    assert header == RESULT_HEADER
    kinds = [r[0] for r in rows]
    assert kinds.count("replicate") == 4 * 3 and kinds.count("mean") == 4 and kinds.count("sd") == 4
    # mean row equals the average of its replicates
    goc = [r for r in rows if r[2] == "goc" and r[5] == "0.01"]
    reps = [float(r[8]) for r in goc if r[0] == "replicate"]
    mean = [float(r[8]) for r in goc if r[0] == "mean"][0]
    sd = [float(r[8]) for r in goc if r[0] == "sd"][0]
    assert mean == pytest.approx(np.mean(reps)) and sd == pytest.approx(np.std(reps, ddof=1))


def test_experiment_jobs_match_serial(tmp_path):
    cfg = {
        "datasets": {"generate": {"seeds": [1, 2], "config": {"K_star": 3, "m": 5}}},
        "methods": [{"method": "goc", "k0": [3]}],
    }
    for name, jobs in (("a", "1"), ("b", "2")):
        (tmp_path / name).mkdir()
        p = tmp_path / name / "exp.json"
        p.write_text(json.dumps(cfg))
        assert main(["experiment", "--config", str(p), "--jobs", jobs]) == 0
    assert (tmp_path / "a/results/results.csv").read_bytes() == (tmp_path / "b/results/results.csv").read_bytes()


@pytest.mark.parametrize(
    "argv",
    [
        ["cluster", "--in", "x", "--k0", "0", "--out", "y"],
        ["cluster", "--in", "x", "--k0", "2", "--lambda", "-1", "--out", "y"],
        ["cluster", "--in", "x", "--k0", "2", "--convergence", "loose", "--out", "y"],
        ["ap", "--in", "x", "--kind", "s4", "--out", "y"],
        ["ap", "--in", "x", "--kind", "s1", "--quantile", "1.5", "--out", "y"],
        ["frobnicate"],
        [],
    ],
)
def test_usage_errors_exit_2(argv):
    assert main(argv) == 2


def test_runtime_errors_exit_1(tmp_path, data_dir, capsys):
    assert main(["cluster", "--in", str(tmp_path / "missing"), "--k0", "2", "--out", str(tmp_path / "o.csv")]) == 1
    assert main(["cluster", "--in", str(data_dir), "--k0", "500", "--out", str(tmp_path / "o.csv")]) == 1
    assert "error:" in capsys.readouterr().err


def test_config_errors(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"datasets": {"generate": {"seeds": [1, 1]}}, "methods": [{"method": "goc"}]}))
    with pytest.raises(ValueError):
        load_config(p)
    p.write_text(json.dumps({"datasets": {"generate": {"seeds": [1]}}, "methods": []}))
    with pytest.raises(ValueError):
        load_config(p)
    assert main(["experiment", "--config", str(p)]) == 1


def test_parse_convergence():
    assert parse_convergence("exact") is None
    assert parse_convergence("tol:1e-6") == 1e-6
    with pytest.raises(ValueError):
        parse_convergence("tol:0")


def test_experiment_rows_independent_of_matrix_order(tmp_path):
    methods = [
        {"method": "baseline", "k0": [3]},
        {"method": "goc", "k0": [3], "lambda": [0.01, 0.0]},
    ]
    for name, order in (("a", methods), ("b", methods[::-1])):
        (tmp_path / name).mkdir()
        p = tmp_path / name / "exp.json"
        cfg = {"datasets": {"generate": {"seeds": [1], "config": {"K_star": 3, "m": 5}}}, "methods": order}
        p.write_text(json.dumps(cfg))
        assert main(["experiment", "--config", str(p)]) == 0
    assert (tmp_path / "a/results/results.csv").read_bytes() == (tmp_path / "b/results/results.csv").read_bytes()


def test_cluster_default_output_name(data_dir, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["cluster", "--in", str(data_dir), "--method", "baseline", "--oracle", "kmeans", "--k0", "5"]) == 0
    assert len(io.read_labels(tmp_path / "assignment.csv")) == 15
