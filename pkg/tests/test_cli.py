import json
import os
import subprocess
import sys

import pytest

from qharness.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_glue_case_ii(capsys):
    code, out, _ = run(["glue", "--params", '{"eta":1,"theta":2,"sigma":0,"tau":0,"gamma":1}'], capsys)
    js = json.loads(out)
    assert code == 0 and js["case"] == "BiPoisson" and js["case_number"] == "ii" and js["V"] == 2.0


def test_identities_exit_zero(capsys):
    code, out, _ = run(["identities", "--trials", "100", "--seed", "7", "--mode", "rational"], capsys)
    assert code == 0
    assert out.count("PASS") == 5


def test_simulate_is_reproducible(tmp_path):
    out = tmp_path / "w.csv"
    argv = ["simulate", "--process", "wiener", "--times", "1,2,3", "--paths", "1000", "--seed", "1", "--out", str(out)]
    assert main(argv) == 0
    first = out.read_bytes()
    assert main(argv) == 0
    assert out.read_bytes() == first
    cfg = json.loads((tmp_path / "w.csv.config.json").read_text())
    assert cfg["seed"] == 1 and cfg["descriptor"]["kind"] == "wiener"


def test_simulate_then_verify(tmp_path, capsys):
    ens = tmp_path / "w.csv"
    main(["simulate", "--process", "wiener", "--times", "1,2,3", "--paths", "50000", "--seed", "3", "--out", str(ens)])
    rep = tmp_path / "r.json"
    code = main(["verify", "--ensemble", str(ens), "--params", "{}", "--stu", "1,2,3", "--out", str(rep)])
    js = json.loads(rep.read_text())
    assert code == 0 and js["verdict"] == "PASS"
    code = main(["verify", "--ensemble", str(ens), "--params", '{"tau": 4}', "--stu", "1,2,3"])
    assert code == 1
    assert json.loads(capsys.readouterr().out)["verdict"] == "FAIL"


def test_bridge_rational(capsys):
    code, out, _ = run(["bridge", "--params", '{"theta":1}', "--R", "0", "--V", "2", "--zr", "0", "--zv", "1", "--mode", "rational"], capsys)
    js = json.loads(out)
    assert code == 0
    assert js["params"]["theta"]["square"] == "2/3" and js["params"]["gamma"] == "1"


def test_condition_and_meixner(capsys):
    code, out, _ = run(["condition", "--params", '{"theta":1}', "--V", "1", "--zv", "2"], capsys)
    js = json.loads(out)
    assert code == 0 and js["side"] == "future"
    assert js["params"]["theta"] == pytest.approx(1 / 3**0.5)
    code, out, _ = run(["meixner-bridge", "--params", '{"theta":2,"tau":1}', "--R", "0", "--V", "0.25", "--slope", "1"], capsys)
    js = json.loads(out)
    assert js["params"]["gamma"] == pytest.approx(-0.6)


def test_transform_commands(capsys):
    code, out, _ = run(["transform", "--params", '{"gamma":1}', "--cov-product", "1,0,1,1"], capsys)
    js = json.loads(out)
    assert code == 0 and js["params"]["gamma"] == 1.0 and js["interval"] == [0.0, 1.0]
    code, out, _ = run(["transform", "--params", '{"theta":1,"eta":2}', "--affine", "0,1,1,0,0,0"], capsys)
    js = json.loads(out)
    assert (js["spec"]["theta"], js["spec"]["eta"]) == (2.0, 1.0)


def test_solve_t1i(capsys):
    code, out, _ = run(["solve-t1i", "--params", '{"eta":-1,"theta":1,"sigma":0.25,"tau":0.25}'], capsys)
    assert code == 0 and json.loads(out)["max_abs_error"] <= 1e-12


def test_pipeline_dirichlet(tmp_path, capsys):
    code, out, _ = run(
        ["pipeline", "--process", "dirichlet", "--c", "1", "--V", "1", "--times", "0.5,1,2", "--stu", "0.5,1,2",
         "--paths", "50000", "--seed", "2", "--standardizer", "dirichlet", "--ensemble-out", str(tmp_path / "y.csv")],
        capsys,
    )
    assert code == 0 and json.loads(out)["verdict"] == "PASS"
    assert (tmp_path / "y.csv").exists()


def test_domain_error_exit_one(capsys):
    code, _, err = run(["bridge", "--params", '{"gamma":5}', "--R", "1", "--V", "2", "--zr", "0", "--zv", "0"], capsys)
    assert code == 1 and err.startswith("NonpositiveDenominator")
    code, _, err = run(["simulate", "--process", "dirichlet", "--times", "2", "--out", os.devnull], capsys)
    assert code == 1 and err.startswith("DomainViolation")


@pytest.mark.parametrize(
    "argv",
    [
        ["glue"],
        ["bogus"],
        ["simulate", "--process", "nope", "--times", "1", "--out", "x.csv"],
        ["verify", "--params", "{}", "--stu", "1,2,3"],
        ["pipeline", "--process", "wiener", "--times", "1,2,3", "--stu", "1,2,3", "--standardizer", "binomial"],
    ],
)
def test_usage_errors_exit_two(argv, capsys):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2


def test_console_script_entry_point(tmp_path):
    env = dict(os.environ, QH_THREADS="2")
    res = subprocess.run([sys.executable, "-m", "qharness.cli", "glue", "--params", "{}"], capture_output=True, text=True, env=env)
    assert res.returncode == 0 and json.loads(res.stdout)["case"] == "Wiener"
