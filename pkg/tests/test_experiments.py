import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vqalab.cli import main
from vqalab.experiments import (
    BOUNDS_HEADER, QNN_CURVE_HEADER, ExperimentConfig, FitResult, Table, fit_sqrt, run, run_bounds_table,
    run_tables,
)

SMALL_QNN = dict(seeds=(1, 2), layers=(1, 2), n_examples=40, train_size=12, epochs=2)


def cfg(name, **kw):
    return ExperimentConfig.from_dict({"experiment": name, **kw})


def test_config_rejects_unknown_keys():
    with pytest.raises(ValueError, match="unknown config key"):
        cfg("qnn_layers", learnig_rate=0.1)
    with pytest.raises(ValueError):
        cfg("qnn_depths")
    with pytest.raises(ValueError):
        cfg("qnn_noise", noise_p=[1.5])
    with pytest.raises(ValueError):
        cfg("qnn_layers", seeds=[1, 1])
    with pytest.raises(ValueError):
        ExperimentConfig.from_json("[1, 2]")


def test_config_round_trip():
    c = cfg("qnn_layers", seeds=[3, 4])
    again = ExperimentConfig.from_dict(c.to_dict())
    assert again.to_dict() == c.to_dict()
    assert c.layer_sweep == (1, 2, 3, 4, 5)
    assert cfg("vqe_adam_depths").layer_sweep == (5, 10, 15, 20)


def test_table_csv_formatting():
    t = Table("t", ["a", "b", "c", "d"], [[1, 0.1, None, True]])
    assert t.to_csv() == "a,b,c,d\n1,0.1,,true\n"


# ------------------------------------------------------------ fitting


def test_fit_exact_line():
    n = np.array([3, 12, 27, 48])
    f = fit_sqrt(n, 2 * np.sqrt(n) - 1)
    assert f.a == pytest.approx(2) and f.b == pytest.approx(-1) and f.r_squared == pytest.approx(1)


def test_fit_constant_response_gives_nan():
    assert math.isnan(fit_sqrt([1, 4, 9], [0.5, 0.5, 0.5]).r_squared)


def test_fit_errors():
    with pytest.raises(ValueError):
        fit_sqrt([1], [1])
    with pytest.raises(ValueError):
        FitResult(1.0, 0.0, 1.5)


@given(st.lists(st.tuples(st.integers(1, 400), st.floats(-1, 1)), min_size=3, max_size=20))
def test_fit_satisfies_normal_equations(points):
    n_gt = np.array([p[0] for p in points], dtype=float)
    y = np.array([p[1] for p in points])
    x = np.sqrt(n_gt)
    if np.ptp(x) < 1e-6:
        return
    f = fit_sqrt(n_gt, y)
    resid = y - (f.a * x + f.b)
    # residuals are orthogonal to both columns of the design matrix
    assert abs(resid.sum()) <= 1e-8 and abs(resid @ x) <= 1e-8
    assert math.isnan(f.r_squared) or f.r_squared <= 1 + 1e-12


# ------------------------------------------------------------ experiments


def test_qnn_layers_schema_and_determinism(tmp_path):
    c = cfg("qnn_layers", **SMALL_QNN)
    a = run(c, tmp_path / "a", timestamp="T")
    b = run(c, tmp_path / "b", timestamp="T")
    assert [p.name for p in a] == ["qnn_layers_T.csv"]
    assert a[0].read_bytes() == b[0].read_bytes()
    lines = a[0].read_text().splitlines()
    assert lines[0].split(",") == ["layers"] + QNN_CURVE_HEADER
    assert len(lines) == 1 + 2 * 3
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["seeds"] == [1, 2] and manifest["files"] == ["qnn_layers_T.csv"]


def test_parallel_matches_serial(tmp_path):
    c = cfg("qnn_noise", **dict(SMALL_QNN, layers=(1,), noise_p=(0.1, 0.9)))
    serial = run(c, tmp_path / "s", timestamp="T")[0].read_bytes()
    par = run(cfg("qnn_noise", **dict(SMALL_QNN, layers=(1,), noise_p=(0.1, 0.9), workers=2)),
              tmp_path / "p", timestamp="T")[0].read_bytes()
    assert serial == par
    header = serial.decode().splitlines()[0].split(",")
    assert header[:2] == ["layers", "p"]


def test_scaling_fit_outputs(tmp_path):
    paths = run(cfg("scaling_fit", **SMALL_QNN), tmp_path, timestamp="T")
    assert [p.name for p in paths] == ["scaling_fit_T.csv", "scaling_fit_summary_T.csv"]
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert set(manifest["fit"]) == {"a", "b", "r_squared"}
    assert paths[0].read_text().splitlines()[1].split(",")[:3] == ["1", "21", repr(math.sqrt(21))]


def test_vqe_three_ansatze_schema():
    (t,), _ = run_tables(cfg("vqe_three_ansatze", seeds=(1,), vqe_iterations=3))
    assert t.header == ["bond_length", "exact_energy", "restricted_mean", "restricted_var", "modest_mean",
                        "modest_var", "overwhelming_mean", "overwhelming_var", "overwhelming_minus_modest"]
    for row in t.rows:
        assert all(row[j] >= row[1] - 1e-9 for j in (2, 4, 6))


def test_vqe_adam_depths_schema():
    (t,), _ = run_tables(cfg("vqe_adam_depths", seeds=(1,), layers=(1, 2), adam_iterations=4))
    assert t.header == ["layers", "seed", "iteration", "energy", "abs_delta", "converged"]
    assert t.rows[0][4] is None and t.rows[1][4] == pytest.approx(abs(t.rows[1][3] - t.rows[0][3]))
    assert sorted(set(t.column("layers"))) == [1, 2]


def test_bounds_table_properties():
    t = run_bounds_table(cfg("bounds_table"))
    assert t.header == BOUNDS_HEADER
    assert len(t.rows) == 2 * 15 + 2 * 3 + 2 * 3
    counts = [r for r in t.rows if r[1] == "gate_count"]
    hea = [r for r in counts if r[0].startswith("qnn_hea")]
    ideal = [r[8] for r in hea]
    assert all(b > a for a, b in zip(ideal, ideal[1:]))
    for r in counts:
        assert r[9] <= r[8]
    fam = {r[0]: r for r in t.rows if r[1] == "family"}
    assert fam["vqe_modest"][8] is None and fam["tree_N8"][8] is not None


# ------------------------------------------------------------ CLI


def test_cli_bounds_counts(capsys):
    assert main(["bounds", "--n-gt", "1", "--epsilon", "0.1"]) == 0
    out = capsys.readouterr().out
    assert f"{4 * math.log(70):.12g}" in out and "general_noise" in out


def test_cli_circuit_then_bounds(tmp_path, capsys):
    assert main(["circuit", "hardware_efficient", "--qubits", "7", "--layers", "2"]) == 0
    text = capsys.readouterr().out
    path = tmp_path / "c.txt"
    path.write_text(text)
    assert main(["bounds", "--circuit", str(path)]) == 0
    assert "n_g=56 n_gt=42" in capsys.readouterr().out


def test_cli_errors(tmp_path, capsys):
    assert main(["bounds", "--n-gt", "1", "--epsilon", "0.5"]) == 2
    assert "vqalab: error" in capsys.readouterr().err
    assert main(["bounds", "--n-gt", "1", "--epsilon", "0.5", "--allow-any-epsilon"]) == 0
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"experiment": "qnn_noise"}))
    assert main(["qnn_layers", "--config", str(conf)]) == 2
    conf.write_text(json.dumps({"epochz": 1}))
    assert main(["qnn_layers", "--config", str(conf)]) == 2


def test_cli_experiment_and_dataset(tmp_path, capsys):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"experiment": "bounds_table", "layers": [1, 2]}))
    assert main(["bounds_table", "--config", str(conf), "--out", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" / "manifest.json").exists()
    assert main(["dataset", "--seed", "1", "--out", str(tmp_path / "d.csv")]) == 0
    assert (tmp_path / "d.csv").read_text().count("\n") == 401
