import json
import math

import numpy as np
import pytest

from fockprint import jsonio
from fockprint.cli import main
from fockprint.dataset import load_jsonl


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def tomo_data(tmp_path, capsys):
    path = tmp_path / "tomo.jsonl"
    assert run(capsys, "generate", "--kind", "tomo", "--n", 1, "--count", 10, "--seed", 7, "--out", path)[0] == 0
    return path


def test_generate_layout(tomo_data):
    data = load_jsonl(tomo_data)
    assert len(data) == 10 and data.X.shape == (10, 126)


def test_generate_empty_and_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for p in (a, b):
        assert run(capsys, "generate", "--kind", "ent", "--count", 3, "--seed", 2, "--out", p)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    empty = tmp_path / "e.jsonl"
    code, out, _ = run(capsys, "generate", "--count", 0, "--out", empty)
    assert code == 0 and "samples         0" in out
    assert len(load_jsonl(empty)) == 0


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    out = tmp_path / "d.jsonl"
    cfg.write_text(f"# dataset run\nkind = entanglement\ncount = 4\ns-max = 3\nout = {out}\n")
    assert run(capsys, "generate", "--config", cfg, "--count", 2)[0] == 0
    data = load_jsonl(out)
    assert data.meta.kind == "entanglement" and data.meta.s_max == 3 and len(data) == 2


def test_config_errors(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert run(capsys, "generate", "--config", cfg, "--out", tmp_path / "x")[0] == 2
    cfg.write_text("count = many\n")
    assert run(capsys, "generate", "--config", cfg, "--out", tmp_path / "x")[0] == 2
    assert run(capsys, "generate", "--config", tmp_path / "missing.cfg")[0] == 3
    assert run(capsys, "generate", "--kind", "nonsense", "--out", tmp_path / "x")[0] == 2
    assert run(capsys, "generate", "--count", 1)[0] == 2


def test_io_errors(tmp_path, capsys):
    assert run(capsys, "generate", "--count", 1, "--out", tmp_path / "no" / "dir.jsonl")[0] == 3
    assert run(capsys, "train", "--data", tmp_path / "missing.jsonl", "--out", tmp_path / "m.json")[0] == 3
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"format":"other","version":1}\n')
    assert run(capsys, "train", "--data", bad, "--out", tmp_path / "m.json")[0] == 3


def test_train_eval_and_determinism(tomo_data, tmp_path, capsys):
    m1, m2 = tmp_path / "m1.json", tmp_path / "m2.json"
    assert run(capsys, "train", "--data", tomo_data, "--out", m1)[0] == 0
    assert run(capsys, "train", "--data", tomo_data, "--out", m2)[0] == 0
    assert m1.read_bytes() == m2.read_bytes()
    model = jsonio.loads(m1.read_text())
    assert len(model["models"]) == 4  # r0, r1, sin phi1, cos phi1

    rep = tmp_path / "r.json"
    code, out, _ = run(capsys, "eval", "--model", m1, "--data", tomo_data, "--out", rep)
    assert code == 0
    for label in ("Mean", "Standard Deviation", "Minimum", "25%", "50%", "75%", "Maximum"):
        assert label in out
    report = json.loads(rep.read_text())
    assert report["format"] == "fockprint-report" and set(report["fidelity"]) >= {"mean", "std", "max"}


def test_train_pca_reports_components(tomo_data, tmp_path, capsys):
    model = tmp_path / "m.json"
    code, out, _ = run(capsys, "train", "--data", tomo_data, "--out", model, "--learner", "ert", "--n-trees", 5, "--pca", 0.999)
    assert code == 0
    k = jsonio.loads(model.read_text())["pca"]["components"]
    assert 1 <= len(k) <= 126 and "PCA keeps" in out


def test_train_convergence_exit_code(tomo_data, tmp_path, capsys):
    code, _, err = run(
        capsys, "train", "--data", tomo_data, "--out", tmp_path / "m.json", "--max-passes", 0, "--tol", 1e-12, "--retries", 1
    )
    assert code == 4 and "converge" in err


def test_eval_layout_mismatch(tomo_data, tmp_path, capsys):
    model = tmp_path / "m.json"
    run(capsys, "train", "--data", tomo_data, "--out", model)
    other = tmp_path / "o.jsonl"
    run(capsys, "generate", "--n", 1, "--count", 3, "--s-max", 4, "--out", other)
    assert run(capsys, "eval", "--model", model, "--data", other)[0] == 2
    ent = tmp_path / "ent.jsonl"
    run(capsys, "generate", "--kind", "ent", "--count", 3, "--out", ent)
    assert run(capsys, "eval", "--model", model, "--data", ent)[0] == 2


def test_eval_entanglement_rows(tmp_path, capsys):
    data, model = tmp_path / "e.jsonl", tmp_path / "m.json"
    run(capsys, "generate", "--kind", "ent", "--count", 12, "--seed", 3, "--out", data)
    run(capsys, "train", "--data", data, "--out", model, "--learner", "ert", "--n-trees", 3)
    code, out, _ = run(capsys, "eval", "--model", model, "--data", data)
    assert code == 0
    for label in ("Entropy Mean Value", "MAE", "R2-score"):
        assert label in out


def test_report_table(tomo_data, tmp_path, capsys):
    model, rep = tmp_path / "m.json", tmp_path / "r.json"
    run(capsys, "train", "--data", tomo_data, "--out", model)
    run(capsys, "eval", "--model", model, "--data", tomo_data, "--out", rep)
    code, out, _ = run(capsys, "report", rep, rep, "--headers", "SVR,again")
    assert code == 0 and "SVR" in out and "again" in out
    assert run(capsys, "report", rep, "--headers", "a,b")[0] == 2


def test_simulate_vacuum(capsys):
    code, out, _ = run(capsys, "simulate", "--state", '{"r": [1]}', "--alpha", 1)
    assert code == 0
    line = next(ln for ln in out.splitlines() if ln.startswith("|0000>"))
    assert float(line.split()[1]) == pytest.approx(math.exp(-2), abs=1e-15)


def test_simulate_single_photon_without_reference(capsys):
    code, out, _ = run(capsys, "simulate", "--state", '{"r": [0, 1]}', "--alpha", 0, "--s-max", 1)
    assert code == 0
    probs = {ln.split()[0]: float(ln.split()[1]) for ln in out.splitlines() if ln.startswith("|")}
    assert set(probs) == {"|1000>", "|0100>", "|0010>", "|0001>"}
    assert sum(probs.values()) == pytest.approx(1, abs=1e-14)


def test_simulate_oracle_check(tmp_path, capsys):
    out_file = tmp_path / "d.json"
    code, out, _ = run(capsys, "simulate", "--random", 2, "--seed", 4, "--oracle-check", "--out", out_file)
    assert code == 0
    assert jsonio.loads(out_file.read_text())["oracle_max_deviation"] < 1e-10


def test_simulate_bad_state(capsys):
    assert run(capsys, "simulate", "--state", '{"r": [0.5, 0.5]}')[0] == 2
    assert run(capsys, "simulate", "--state", "not json")[0] == 2
    assert run(capsys, "simulate")[0] == 2


def test_tomo_analytic_round_trip(capsys):
    code, out, _ = run(capsys, "tomo-analytic", "--state", "0.6,0.8,2.5", "--alpha", 0.8)
    assert code == 0
    fid = float(next(ln for ln in out.splitlines() if ln.startswith("fidelity")).split()[1])
    assert fid == pytest.approx(1.0, abs=1e-8)


def test_tomo_analytic_warnings(capsys):
    code, out, err = run(capsys, "tomo-analytic", "--probs", f"{math.exp(-2)},0,0,0,0")
    assert code == 0 and "degenerate" in err
    assert float(out.split()[1]) == pytest.approx(1.0)
    code, _, err = run(capsys, "tomo-analytic", "--probs", "0.2,0.1,0.1,0.1,0.1")
    assert code == 0 and "inconsistent" in err
