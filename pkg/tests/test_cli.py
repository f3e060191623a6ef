import json

import pytest

from r1lab.cli import main, parse_measure_file
from r1lab.errors import ValidationError


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def antipodal(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"space": "full", "n": 2, "atoms": [
        {"weight": 0.5, "matrix": [[1, 0], [0, 1]]},
        {"weight": 0.5, "matrix": [[-1, 0], [0, -1]]}]}))
    return path


def test_prelaminate_hand_case(capsys):
    code, out, _ = run(capsys, "prelaminate", "--kind", "lemma-hom", "--a", "2", "--z", "1", "--w", "0", "--t", "2")
    assert code == 0
    rep = json.loads(out)
    res = rep["results"][0]["report"]
    assert res["lambda_1"] == pytest.approx(4 / 7, abs=1e-14)
    assert res["lambda_2"] == pytest.approx(5 / 8, abs=1e-14)
    assert rep["overall_pass"] is True
    assert rep["command_echo"]["flags"]["a"] == 2.0


def test_jensen_antipodal_fails(capsys, antipodal):
    code, out, _ = run(capsys, "jensen", "--measure", str(antipodal), "--family", "default")
    assert code == 1
    assert json.loads(out)["results"][0]["report"]["witness"]["check"] == "det equality"


def test_jensen_explicit_family(capsys, antipodal):
    code, out, _ = run(capsys, "jensen", "--measure", str(antipodal), "--family", "det+,absdet")
    assert code == 0
    assert json.loads(out)["results"][0]["report"]["family"] == ["absdet", "det+"]


def test_usage_errors_exit_2(capsys, tmp_path):
    assert run(capsys, "scan", "--bogus")[0] == 2
    assert run(capsys, "jensen", "--measure", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "scan", "--integrand", "nope")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys)[0] == 2
    code, _, err = run(capsys, "scan", "--seed", "-1", "--integrand", "det+")
    assert code == 2 and "seed" in err


def test_bad_measure_file(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"space": "full", "n": 2, "atoms": [
        {"weight": 0.5, "matrix": [[1, 0], [0, 1]]}, {"weight": 0.6, "matrix": [[0, 0], [0, 0]]}]}))
    with pytest.raises(ValidationError, match="weights sum to 1.1"):
        parse_measure_file(str(path))
    code, _, err = run(capsys, "jensen", "--measure", str(path))
    assert code == 2 and "weights sum to 1.1" in err


def test_measure_file_round_trip(tmp_path):
    obj = {"space": "symmetric", "n": 2, "atoms": [{"weight": 1.0, "matrix": [[1.0, 2.0], [2.0, 3.0]]}]}
    path = tmp_path / "one.json"
    path.write_text(json.dumps(obj))
    nu = parse_measure_file(str(path))
    assert nu.to_json() == obj


def test_scan_csv_and_seed_env(capsys, monkeypatch):
    monkeypatch.setenv("R1LAB_SEED", "9")
    code, out, _ = run(capsys, "scan", "--integrand", "neg:det+", "--samples", "30", "--directions", "10")
    assert code == 1
    assert json.loads(out)["command_echo"]["seed"] == 9
    code, out, _ = run(capsys, "scan", "--integrand", "det+", "--samples", "30", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "t_minus,t_0,t_plus,gap"


def test_fit_and_identity(capsys):
    assert run(capsys, "fit-nl", "--integrand", "det", "--n", "3")[0] == 0
    assert run(capsys, "fit-nl", "--integrand", "sqnorm")[0] == 1
    assert run(capsys, "fit-nl", "--integrand", "det+", "--region", "det-positive")[0] == 0
    code, out, _ = run(capsys, "identity-check", "--p", "1.5", "--z", "1", "--w", "0")
    assert code == 0
    assert json.loads(out)["results"][0]["report"]["rhs"] == pytest.approx(16 / 3, abs=1e-12)


def test_out_file(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, stdout, _ = run(capsys, "identity-check", "--out", str(out))
    assert code == 0 and stdout == ""
    assert json.loads(out.read_text())["overall_pass"] is True


def test_same_seed_same_bytes(capsys):
    a = run(capsys, "scan", "--integrand", "neg:sqnorm", "--samples", "20", "--seed", "5")
    b = run(capsys, "scan", "--integrand", "neg:sqnorm", "--samples", "20", "--seed", "5")
    assert a == b
