import json
import math
import os
import subprocess
import sys

import pytest

from nrsector.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def report(capsys, *argv):
    code, out, _ = run_cli(capsys, *argv)
    return code, json.loads(out)


def test_lemma2_example(capsys):
    code, rep = report(capsys, "lemma2", "--p", "4", "--samples", "100000", "--seed", "42")
    assert code == 0
    assert rep["passed"]
    assert rep["result"]["max_angle"] <= math.pi / 6 + 1e-9


def test_lemma3_example(capsys):
    code, rep = report(capsys, "lemma3", "--lambda", "3")
    assert code == 0
    assert abs(rep["result"]["best_angle"] - math.pi / 6) <= 1e-6


def test_range_p2_real(capsys):
    code, rep = report(capsys, "range", "--gen", "paper2x2", "--p", "2", "--samples", "1000")
    assert code == 0
    assert max(abs(v[1]) for v in rep["result"]["values"]) <= 1e-10
    assert any(c["name"] == "real_values" for c in rep["checks"])


def test_report_header(capsys):
    _, rep = report(capsys, "jacobian", "--samples", "50")
    assert rep["schema_version"] == 1
    assert rep["tool"] == "nrsector"
    assert rep["command"] == "jacobian"
    assert rep["seed"] == 0
    assert rep["config"]["samples"] == 50
    assert {"name", "passed", "defect", "tolerance"} <= set(rep["checks"][0])
    assert "wall_time_s" not in rep


def test_timing_flag(capsys):
    _, rep = report(capsys, "lemma3", "--timing")
    assert rep["wall_time_s"] >= 0


@pytest.mark.parametrize("argv", [
    ["sharpness", "--p", "4", "--restarts", "8"],
    ["sharpness", "--gen", "paper2x2", "--p", "1.5"],
    ["certificate", "--gen", "random:5", "--p", "3", "--blocks", "3"],
    ["compress", "--gen", "random-pp:6", "--t", "0.5"],
    ["validate", "--gen", "lambda:0,1"],
    ["range", "--gen", "random", "--n", "4", "--samples", "500"],
])
def test_commands_pass(capsys, argv):
    code, rep = report(capsys, *argv)
    assert code == 0, rep["checks"]


def test_sweep_passes(capsys):
    code, rep = report(capsys, "sweep", "--p", "3", "--restarts", "2")
    assert code == 0
    assert rep["result"]["max_inside"] <= 1 + 1e-8


def test_invalid_flags_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["range", "--p", "0.5"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2


def test_bad_generator_exit_two(capsys):
    code, _, err = run_cli(capsys, "range", "--gen", "bogus")
    assert code == 2
    assert "error" in err


def test_invalid_matrix_file_fails(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"matrix": [[1, -2], [-2, 1]], "weights": [1, 1]}))
    code, rep = report(capsys, "validate", "--gen", str(path))
    assert code == 1
    assert not rep["passed"]
    failed = {c["name"] for c in rep["checks"] if not c["passed"]}
    assert {"positive_semidefinite", "linf_contractive"} <= failed


def test_complex_matrix_file(tmp_path, capsys):
    path = tmp_path / "gen.json"
    path.write_text(json.dumps({"matrix": [[1, [0, 1]], [[0, -1], 1]], "weights": [1, 1]}))
    code, _ = report(capsys, "range", "--gen", str(path), "--samples", "200")
    assert code == 0


def test_laplacian_file(tmp_path, capsys):
    path = tmp_path / "lap.json"
    path.write_text(json.dumps({"W": [[0, 1, 0], [1, 0, 1], [0, 1, 0]], "d": [1, 2, 1],
                                "weights": [1, 1, 1]}))
    code, _ = report(capsys, "certificate", "--gen", f"laplacian:{path}")
    assert code == 0


def test_output_file_is_atomic_and_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["certificate", "--gen", "random:6", "--seed", "3", "--p", "1.5"]
    assert main(args + ["-o", str(a)]) == 0
    assert main(args + ["-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert sorted(os.listdir(tmp_path)) == ["a.json", "b.json"]


def test_no_partial_report_on_error(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["range", "--gen", "random:0", "-o", str(out)]) == 2
    assert not out.exists()
    assert os.listdir(tmp_path) == []


def test_csv_outputs(capsys):
    _, out, _ = run_cli(capsys, "range", "--samples", "5", "--format", "csv")
    assert out.splitlines()[0] == "re,im,abs,arg"
    assert len(out.splitlines()) == 6
    _, out, _ = run_cli(capsys, "sweep", "--format", "csv", "--restarts", "1")
    assert out.splitlines()[0] == "theta,radius,norm_estimate,inside_sector"
    _, out, _ = run_cli(capsys, "lemma3", "--format", "csv")
    assert out.splitlines()[0] == "name,passed,defect,tolerance"


def test_console_script_entry():
    res = subprocess.run([sys.executable, "-m", "nrsector.cli", "lemma3", "--lambda", "2"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert json.loads(res.stdout)["passed"]
