import json
import subprocess
import sys

import numpy as np
import pytest

from diffgabor import cli, diffsets, gabor, solvers


def _run(capsys, *argv):
    rc = cli.main(list(argv))
    out = capsys.readouterr().out
    return rc, out


def _run_json(capsys, *argv):
    rc, out = _run(capsys, *argv)
    return rc, json.loads(out)


def test_version_flag(capsys):
    rc, _ = _run(capsys, "--version")
    assert rc == 0


def test_unknown_subcommand(capsys):
    assert cli.main(["frobnicate"]) == 2
    assert cli.main([]) == 2


def test_diffset_verify(capsys):
    rc, doc = _run_json(capsys, "diffset", "verify", "7", "1,2,4")
    assert rc == 0
    assert doc["version"]
    assert doc["config"]["N"] == 7
    rep = doc["report"]
    assert rep["is_difference_set"] is True
    assert rep["inferred_lambda"] == 1
    assert rep["difference_counts"]["6"] == 1


def test_diffset_verify_bad_residue(capsys):
    rc, out = _run(capsys, "diffset", "verify", "7", "1,2,9")
    assert rc == 3 and out == ""


def test_diffset_search(capsys):
    rc, doc = _run_json(capsys, "diffset", "search", "13", "4")
    assert rc == 0
    assert doc["report"]["status"] == "found"
    assert doc["report"]["set"]["elements"] == [0, 1, 3, 9]
    assert doc["report"]["nodes"] == 9


def test_diffset_catalog(capsys):
    rc, doc = _run_json(capsys, "diffset", "catalog")
    assert rc == 0
    assert len(doc["report"]["entries"]) >= 13

    rc, doc = _run_json(capsys, "diffset", "catalog", "--set", "6,3")
    assert rc == 0
    assert doc["report"] == {"found": False, "set": None}


def test_gabor_coherence(capsys):
    rc, doc = _run_json(capsys, "gabor", "coherence", "--set", "7,3")
    assert rc == 0
    rep = doc["report"]
    assert rep["mutual_coherence"] == pytest.approx(np.sqrt(4 / 18), abs=1e-10)
    assert rep["predicted"] == pytest.approx(np.sqrt(4 / 18), abs=1e-10)
    assert rep["tightness_error"] < 1e-9


def test_gabor_coherence_missing_set(capsys):
    rc, out = _run(capsys, "gabor", "coherence", "--set", "6,3")
    assert rc == 3 and out == ""


def test_gabor_table(capsys):
    rc, doc = _run_json(capsys, "gabor", "table", "--quadratic", "11",
                        "--quartic", "", "--singer", "2:2")
    assert rc == 0
    rows = doc["report"]["rows"]
    assert len(rows) == 2
    families = {r["family"] for r in rows}
    assert families == {"singer d=2", "quadratic"}


def test_fusion_report(capsys):
    rc, doc = _run_json(capsys, "fusion", "report", "--set", "7,3")
    assert rc == 0
    rep = doc["report"]
    assert rep["tight_bound"] == 3.0
    assert rep["dc_squared"] == 2.0
    assert rep["equidistant"] is True and rep["optimal_packing"] is True
    assert rep["sparsity"] == 21


def test_fusion_distances(capsys, tmp_path):
    out_path = tmp_path / "d.csv"
    rc, _ = _run(capsys, "fusion", "distances", "--set", "7,3", "--out", str(out_path))
    assert rc == 0
    lines = out_path.read_text().splitlines()
    assert lines[0] == "a,b,dc_squared"
    assert len(lines) == 1 + 7 * 6 // 2
    assert all(ln.endswith(",2") for ln in lines[1:])


def _write_instance(tmp_path):
    ds = diffsets.catalog_lookup(7, 3)
    frame = gabor.build_gabor_frame(gabor.difference_set_generator(ds))
    x = np.zeros(49, dtype=complex)
    x[[4, 22]] = [1.0 + 0.5j, -0.75]
    A_path, y_path = tmp_path / "A.csv", tmp_path / "y.csv"
    solvers.write_complex_matrix_csv(A_path, frame.columns)
    solvers.write_complex_matrix_csv(y_path, frame.columns @ x)
    return A_path, y_path, x


def test_solve_bp_roundtrip(capsys, tmp_path):
    A_path, y_path, x = _write_instance(tmp_path)
    x_path = tmp_path / "x.csv"
    rc, doc = _run_json(capsys, "solve", "bp", "--matrix", str(A_path),
                        "--y", str(y_path), "--out", str(x_path))
    assert rc == 0
    assert doc["report"]["status"] == "converged"
    assert doc["report"]["feasibility_gap"] < 1e-9
    x_hat = solvers.read_complex_matrix_csv(x_path).reshape(-1)
    assert np.linalg.norm(x_hat - x) / np.linalg.norm(x) < 1e-6


def test_solve_bp_inline_solution(capsys, tmp_path):
    A_path, y_path, x = _write_instance(tmp_path)
    rc, doc = _run_json(capsys, "solve", "bp", "--matrix", str(A_path), "--y", str(y_path))
    assert rc == 0
    sol = np.array([re + 1j * im for re, im in doc["report"]["solution"]])
    assert np.linalg.norm(sol - x) / np.linalg.norm(x) < 1e-6


def test_solve_bp_iteration_cap_exit_code(capsys, tmp_path):
    A_path, y_path, _ = _write_instance(tmp_path)
    rc, doc = _run_json(capsys, "solve", "bp", "--matrix", str(A_path),
                        "--y", str(y_path), "--max-iters", "2")
    assert rc == 4
    assert doc["report"]["status"] == "max_iters_reached"
    assert doc["report"]["iterations"] == 2


def test_solve_bp_missing_file(capsys, tmp_path):
    rc, out = _run(capsys, "solve", "bp", "--matrix", str(tmp_path / "nope.csv"),
                   "--y", str(tmp_path / "nope2.csv"))
    assert rc == 3 and out == ""


def test_solve_block_bp(capsys, tmp_path):
    from diffgabor import fusion as fu
    ff = fu.build_fusion_frame(diffsets.catalog_lookup(7, 3))
    a = solvers.gaussian_measurement_coefficients(4, 7, seed=12)
    op = solvers.assemble_fusion_operator(a, ff)
    rng = np.random.default_rng(13)
    c = np.zeros(21, dtype=complex)
    c[6:9] = rng.standard_normal(3)
    A_path, y_path = tmp_path / "A.csv", tmp_path / "y.csv"
    solvers.write_complex_matrix_csv(A_path, op.effective)
    solvers.write_complex_matrix_csv(y_path, op.effective @ c)
    rc, doc = _run_json(capsys, "solve", "block-bp", "--matrix", str(A_path),
                        "--y", str(y_path), "--blocks", "7,3")
    assert rc == 0
    sol = np.array([re + 1j * im for re, im in doc["report"]["solution"]])
    assert np.linalg.norm(sol - c) / np.linalg.norm(c) < 1e-6


def test_experiment_classic_csv(capsys, tmp_path):
    out_path = tmp_path / "classic.csv"
    rc, doc = _run_json(capsys, "experiment", "classic", "--n", "7",
                        "--generators", "alltop", "--ks", "1", "--trials", "4",
                        "--seed", "2", "--out", str(out_path))
    assert rc == 0
    text = out_path.read_text()
    assert text.startswith("experiment,label,x,successes,trials,rate\n")
    assert "classic,alltop,1,4,4,1.000000" in text
    assert doc["report"]["curves"][0]["points"] == [[1, 4, 4]]


def test_experiment_classic_deterministic_bytes(capsys, tmp_path):
    args = ["experiment", "classic", "--n", "7", "--generators", "random_torus",
            "--ks", "1,2", "--trials", "3", "--seed", "8"]
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(args + ["--out", str(p1)]) == 0
    assert cli.main(args + ["--out", str(p2)]) == 0
    capsys.readouterr()
    assert p1.read_bytes() == p2.read_bytes()


def test_experiment_fusion_csv(capsys, tmp_path):
    out_path = tmp_path / "fusion.csv"
    rc, doc = _run_json(capsys, "experiment", "fusion", "--set", "7,3",
                        "--measurements", "4", "--ks", "1,3", "--trials", "3",
                        "--seed", "2", "--out", str(out_path))
    assert rc == 0
    lines = out_path.read_text().splitlines()
    assert lines[1].startswith("fusion,n=4,1,")


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "diffgabor", "diffset", "verify", "7", "1,2,4"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    assert doc["report"]["is_difference_set"] is True
