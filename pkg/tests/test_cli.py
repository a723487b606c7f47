import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from qubofs import qubo
from qubofs.cli import main


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def instance(tmp_path, capsys):
    code, _, _ = _run(capsys, "qubo", "build", "--input", "breast-cancer", "--phi", "0.75", "--output", tmp_path / "inst.json")
    assert code == 0
    return tmp_path / "inst.json"


def test_data_load_summary(capsys, tmp_path):
    code, out, _ = _run(capsys, "data", "load", "--input", "breast-cancer", "--output", tmp_path / "bc.csv")
    summary = json.loads(out)
    assert code == 0 and summary["m"] == 569 and summary["n"] == 10
    assert (tmp_path / "bc.csv").read_text().splitlines()[0].endswith("target")


def test_data_split(capsys, tmp_path):
    code, out, _ = _run(capsys, "data", "split", "--input", "german-credit", "--fraction", "0.5", "--seed", 3, "--output-dir", tmp_path)
    halves = json.loads(out)
    assert code == 0 and halves["a"]["m"] + halves["b"]["m"] == 1000
    assert (tmp_path / "split_a.csv").exists() and (tmp_path / "split_b.csv").exists()


def test_measures_schema(capsys, tmp_path):
    code, _, _ = _run(capsys, "measures", "--input", "breast-cancer", "--tuple", "MI,ROC", "--output", tmp_path / "m.json")
    obj = json.loads((tmp_path / "m.json").read_text())
    assert code == 0 and {"tuple", "inter_feature", "to_target"} <= set(obj)
    assert np.asarray(obj["inter_feature"]).shape == (10, 10)


def test_qubo_build_from_matrices_and_exact(capsys, tmp_path):
    _run(capsys, "measures", "--input", "breast-cancer", "--output", tmp_path / "m.json")
    code, _, _ = _run(capsys, "qubo", "build", "--matrices", tmp_path / "m.json", "--phi", "0.95", "--output", tmp_path / "i.json")
    inst = json.loads((tmp_path / "i.json").read_text())
    assert code == 0 and inst["phi"] == 0.95 and {"q", "provenance"} <= set(inst)
    code, out, _ = _run(capsys, "qubo", "exact", "--input", tmp_path / "i.json")
    sol = json.loads(out)
    ref = qubo.exact_minmax(qubo.QuboInstance.load(tmp_path / "i.json"))
    assert code == 0 and sol["h_min"] == ref.h_min and sol["z_min"] == qubo.bitstring(ref.z_min)


def test_solve_trace(capsys, tmp_path, instance):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"algorithm": "SAEA", "mu": 10, "tau": 0.05}))
    code, out, _ = _run(
        capsys, "solve", "--algo", "saea", "--budget", 300, "--seed", 7, "--config", cfg, "--instance", instance, "--trace", tmp_path / "t.csv"
    )
    res = json.loads(out)
    assert code == 0 and res["evaluations"] == 300 and res["config"]["seed"] == 7 and res["config"]["mu"] == 10
    with open(tmp_path / "t.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["ofe", "popcount", "objective", "cumulative_best"] and len(rows) == 300
    assert float(rows[-1]["cumulative_best"]) == res["best_value"]


def test_quantum_qaoa_json(capsys, tmp_path):
    q = np.array([[0.4, -0.1, 0.0], [-0.1, 0.3, -0.2], [0.0, -0.2, 0.5]])
    qubo.QuboInstance(q, 0.5).save(tmp_path / "i.json")
    code, _, _ = _run(
        capsys, "quantum", "qaoa", "--p-max", 2, "--shots", 1000, "--warm-start", "all", "--maxfev", 200, "--instance", tmp_path / "i.json", "--out", tmp_path / "q.json"
    )
    obj = json.loads((tmp_path / "q.json").read_text())
    assert code == 0 and len(obj["layers"]) == 2
    layer = obj["layers"][1]
    assert {"gamma", "beta", "expectation", "approximation_ratio", "top"} <= set(layer)
    assert len(layer["gamma"]) == 2 and len(layer["top"]) <= 10
    code, _, _ = _run(capsys, "quantum", "vqe", "--layers", 1, "--maxfev", 100, "--shots", 500, "--instance", tmp_path / "i.json", "--out", tmp_path / "v.json")
    assert code == 0 and json.loads((tmp_path / "v.json").read_text())["layers"] == 1


def test_eval_subset_and_report(capsys, tmp_path):
    code, out, _ = _run(capsys, "eval", "--subset", "0b1101000000", "--data", "breast-cancer")
    rows = json.loads(out)
    assert code == 0 and rows[0]["n_features"] == 3
    code, _, _ = _run(capsys, "eval", "rfe", "--data", "breast-cancer", "--report", tmp_path / "r.json")
    rep = json.loads((tmp_path / "r.json").read_text())
    assert code == 0 and set(rep[0]) == {"method", "auroc", "accuracy", "n_features"}


def test_sweep_and_tuples(capsys, tmp_path):
    assert _run(capsys, "sweep-phi", "--input", "breast-cancer", "--phi", "0,0.5,1", "--output", tmp_path / "s.csv")[0] == 0
    assert len((tmp_path / "s.csv").read_text().splitlines()) == 4
    assert _run(capsys, "compare-tuples", "--input", "breast-cancer", "--output", tmp_path / "t.csv")[0] == 0
    assert len((tmp_path / "t.csv").read_text().splitlines()) == 9


def test_tune_and_validate(capsys, tmp_path, instance):
    code, out, _ = _run(
        capsys, "tune", "--algo", "ueda", "--instance", instance, "--n-configs", 3, "--runs", 2, "--budget", 100, "--output-dir", tmp_path
    )
    assert code == 0 and "performance" in json.loads(out)
    best = json.loads((tmp_path / "tuned_config.json").read_text())
    assert best["algorithm"] == "UEDA" and "seed" not in best
    configs = tmp_path / "configs.json"
    configs.write_text(json.dumps({"ueda": best, "rs": {}}))
    code, _, _ = _run(capsys, "validate", "--instance", instance, "--configs", configs, "--runs", 2, "--budget", 100, "--output-dir", tmp_path / "v")
    assert code == 0
    curves = (tmp_path / "v" / "gap_curves.csv").read_text().splitlines()
    assert curves[0] == "algorithm,ofe,p5,p50,p95" and len(curves) == 1 + 2 * 100
    assert len((tmp_path / "v" / "validation_summary.csv").read_text().splitlines()) == 3


def test_report_reemit(capsys, tmp_path):
    src = tmp_path / "rows.json"
    src.write_text(json.dumps([{"method": "x", "auroc": 0.123456789}]))
    assert _run(capsys, "report", "--input", src, "--format", "csv", "--output", tmp_path / "rows.csv")[0] == 0
    assert (tmp_path / "rows.csv").read_text() == "method,auroc\nx,0.123457\n"


def test_errors_exit_2(capsys, tmp_path):
    code, _, err = _run(capsys, "qubo", "exact", "--input", tmp_path / "missing.json")
    assert code == 2 and "error" in err
    bad = tmp_path / "bad.csv"
    bad.write_text("a,target\n1,0\n2,2\n3,1\n")
    assert _run(capsys, "data", "load", "--input", bad)[0] == 2


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "qubofs.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for cmd in ("data", "measures", "qubo", "solve", "quantum", "eval", "sweep-phi", "compare-tuples", "tune", "validate", "report"):
        assert cmd in out.stdout
