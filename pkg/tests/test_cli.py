"""Command-line interface: reports, exit codes and determinism."""

import json
import subprocess
import sys

from artifact import cli, suites


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_rsk_small(capsys):
    code, out, err = run(["verify", "rsk", "--max-part", "2", "--max-len", "2", "--r-max", "1"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["verdict"] == "pass" and doc["command"] == "verify rsk"
    assert doc["config"]["max_part"] == 2
    assert all("seconds" not in c for c in doc["checks"])
    assert "seconds" in json.loads(err)


def test_usage_errors_exit_2(capsys):
    assert run(["verify", "operators", "--part-bound", "3", "--max-degree", "2"], capsys)[0] == 2
    assert run(["verify", "nothing"], capsys)[0] == 2
    assert run(["sample", "asep", "--layers", "3"], capsys)[0] == 2
    assert run(["evaluate", "formula", "--id", "bogus", "--params", "x.json"], capsys)[0] == 2


def test_failed_check_exits_1(capsys, monkeypatch):
    def broken():
        r = suites.SuiteResult("worked-example")
        r.record(False, "crafted failure")
        return r

    monkeypatch.setattr(suites, "worked_example", broken)
    code, out, _ = run(["verify", "rsk", "--max-part", "1", "--max-len", "1", "--r-max", "0"], capsys)
    assert code == 1
    doc = json.loads(out)
    assert doc["verdict"] == "fail"
    assert doc["checks"][0]["failures"] == ["crafted failure"]


def test_sample_asep_is_byte_identical(tmp_path, capsys):
    argv = ["sample", "asep", "--layers", "2", "--tau", "0.5", "--runs", "200", "--seed", "9",
            "--observable", "0:0:1,0:1:1"]
    code1, out1, _ = run(argv, capsys)
    code2, out2, _ = run(argv, capsys)
    assert code1 == code2 == 0 and out1 == out2
    csv1, csv2 = tmp_path / "a.csv", tmp_path / "b.csv"
    run(argv[:-2] + ["--runs", "3", "--csv", str(csv1)], capsys)
    run(argv[:-2] + ["--runs", "3", "--csv", str(csv2)], capsys)
    assert csv1.read_bytes() == csv2.read_bytes()
    assert csv1.read_text().splitlines()[0] == "run,time,site,layer,event"


def test_sample_field_report(capsys):
    code, out, _ = run(["sample", "field", "--extent", "2", "2", "--seed", "3"], capsys)
    assert code == 0
    assert json.loads(out)["verdict"] == "pass"


def test_evaluate_formula(tmp_path, capsys):
    p = tmp_path / "p.json"
    p.write_text(json.dumps({"ms": [0, 0], "ks": [1, 0], "order": 1}))
    code, out, _ = run(["evaluate", "formula", "--id", "asep-2pt", "--params", str(p),
                        "--mode", "tau-series"], capsys)
    assert code == 0
    assert "t - 1" in out


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "artifact.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "verify" in res.stdout
