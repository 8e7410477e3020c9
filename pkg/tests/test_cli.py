import json

import pytest

from twoadic_lift import cli


def run(argv, capsys):
    code = cli.run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_construct_and_verify(tmp_path, capsys):
    out = tmp_path / "c.json"
    code, _, _ = run(["construct", "--m", "3,5,7", "--seed", "1", "--out", str(out)], capsys)
    assert code == 0
    cert = json.loads(out.read_text())
    assert cert["verdict"] == "pass" and cert["input"]["final_d"] == 3
    code, stdout, _ = run(["verify", str(out)], capsys)
    assert code == 0 and "verdict pass" in stdout


def test_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run(["construct", "--m", "3,5", "--seed", "7", "--out", str(p)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_tampered_plan_fails(tmp_path, capsys):
    out = tmp_path / "c.json"
    run(["construct", "--m", "3,5", "--out", str(out)], capsys)
    cert = json.loads(out.read_text())
    row = cert["plan"][0]["Q0"][0]["digits"][0]
    row[0] = str(int(row[0]) + 1)
    out.write_text(json.dumps(cert))
    code, stdout, err = run(["verify", str(out)], capsys)
    assert code == 2 and "verdict fail" in stdout and "FAIL" in err


@pytest.mark.parametrize("m", ["5,7,9", "1,3,5"])
def test_rejection_exit_code(m, capsys, monkeypatch):
    def boom(*a, **k):
        raise AssertionError("construction must not run")

    monkeypatch.setattr(cli, "construct", boom)
    code, _, err = run(["construct", "--m", m, "--out", "-"], capsys)
    assert code == 2 and "4 ∤ m_1+1" in err


def test_usage_errors(capsys, tmp_path):
    assert run(["construct", "--m", "3,x"], capsys)[0] == 1
    assert run(["construct"], capsys)[0] == 1
    assert run(["bogus"], capsys)[0] == 1
    assert run(["verify", str(tmp_path / "missing.json")], capsys)[0] == 1


def test_thicknesses_output(capsys):
    code, out, _ = run(["thicknesses", "--m", "3,7,11"], capsys)
    assert code == 0
    for text in ("eps0 = 1/26", "eps1 = 1/2", "eps12 = 1/13", "eps23 = 2/13", "eps1~ = 41/26",
                 "varrho exponents = 1/2, 15/26, 19/26"):
        assert text in out


def test_config_file_and_overrides(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"n": 2, "m": [3, 3], "coeffs": [["1", "0"], ["01", "1"]], "d": 2}))
    out = tmp_path / "c.json"
    code, _, _ = run(["construct", "--config", str(cfg), "--seed", "3", "--out", str(out)], capsys)
    assert code == 0
    cert = json.loads(out.read_text())
    assert cert["input"]["seed"] == 3 and cert["input"]["coeffs"] == [["1", "0"], ["01", "1"]]


def test_dependent_coefficients_rejected(capsys):
    code, _, err = run(["construct", "--m", "3,3", "--coeffs", "1,0;1,1", "--d", "2", "--out", "-"], capsys)
    assert code == 2 and "dependent" in err


def test_field_extension_retry(tmp_path, capsys):
    out = tmp_path / "c.json"
    code, _, _ = run(["construct", "--m", "3,7,11", "--d", "2", "--out", str(out)], capsys)
    assert code == 0
    cert = json.loads(out.read_text())
    steps = cert["field_extensions"]
    assert steps[0]["reason"] == "ResidueFieldTooSmall" and steps[0]["to_d"] == 4
    assert cert["input"]["final_d"] == steps[-1]["to_d"]


def test_extension_cap(capsys, monkeypatch):
    from twoadic_lift.padic import NeedsFieldExtension

    def always(*a, **k):
        raise NeedsFieldExtension("forced")

    monkeypatch.setattr(cli, "construct", always)
    code, _, err = run(["construct", "--m", "3,5", "--out", "-"], capsys)
    assert code == 3 and "cap" in err


def test_selftest(capsys):
    code, _, err = run(["selftest", "--trials", "5"], capsys)
    assert code == 0 and "FAIL" not in err
