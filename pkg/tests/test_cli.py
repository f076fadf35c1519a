import json
import subprocess
import sys

import pytest

from chainpay.cli import main, parse_pmf


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_pay(capsys):
    code, out, _ = run(capsys, "pay", "--mech", "gdgeom:1/2,1/2", "--t", "3")
    assert code == 0 and out == "1/8 1/4 1/2\n"


def test_pay_with_budget(capsys):
    code, out, _ = run(capsys, "pay", "--mech", "dgeom:1/2", "--rmax", "7", "--t", "3")
    assert code == 0 and out == "1 2 4\n"


def test_check_failure_exit_code(capsys):
    code, out, _ = run(capsys, "check", "--mech", "topdown", "--prop", "CP")
    report = json.loads(out)
    assert code == 1
    assert report["verdict"] == "fail"
    assert report["witness"] == {"k": 1, "t": 2, "n": None, "p": 1}
    assert report["margin"] == "1/16"
    assert report["mechanism"] == "topdown"


def test_check_certified(capsys):
    code, out, _ = run(capsys, "check", "--mech", "wta", "--prop", "DSP")
    assert code == 0 and json.loads(out)["verdict"] == "certified"


def test_attack(capsys):
    code, out, _ = run(capsys, "attack", "--mech", "topdown", "--kind", "collapse", "--t", "3")
    assert code == 1
    assert json.loads(out)["move"] == {"k": 1, "t": 3, "p": 2}
    code, _, _ = run(capsys, "attack", "--mech", "wta", "--kind", "sybil", "--k", "1", "--t", "3")
    assert code == 0


def test_prove(capsys, tmp_path):
    out_file = tmp_path / "proof.json"
    code, out, _ = run(capsys, "prove", "--theorem", "impossibility", "--horizon", "3",
                       "--out", str(out_file))
    assert code == 0 and out == ""
    assert json.loads(out_file.read_text())["forced_zero"] == [[2, 3]]
    code, out, _ = run(capsys, "prove", "--theorem", "wta", "--horizon", "4")
    assert code == 0 and json.loads(out)["interior_forced"] is True


@pytest.mark.parametrize(
    "argv",
    [
        ["pay", "--mech", "dgeom:1", "--t", "3"],
        ["pay", "--mech", "gdgeom:1/2", "--t", "3"],
        ["pay", "--t", "3"],
        ["check", "--mech", "topdown", "--prop", "EpsDSP"],
        ["check", "--mech", "topdown", "--prop", "Bogus"],
        ["prove", "--horizon", "2"],
        ["pay", "--mech", "table:/no/such/file.csv", "--t", "1"],
        ["frobnicate"],
        [],
    ],
)
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


def test_region_threads_byte_identical(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["region", "--step-delta", "1/4", "--step-eps", "1/2", "--step-gamma", "1/4",
                 "--out", str(a)]) == 0
    assert main(["region", "--step-delta", "1/4", "--step-eps", "1/2", "--step-gamma", "1/4",
                 "--threads", "3", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "delta,epsilon,gamma,inside,witness_property,witness_t,witness_n"


def test_simulate_is_reproducible(tmp_path, monkeypatch):
    args = ["simulate", "--mech", "dgeom:1/2", "--runs", "200", "--pmf", "0:1/2,2:1/2",
            "--seed", "4"]
    monkeypatch.setenv("CHAINPAY_THREADS", "2")
    first, second, rows = tmp_path / "1.json", tmp_path / "2.json", tmp_path / "runs.csv"
    assert main(args + ["--out", str(first), "--per-run", str(rows)]) == 0
    monkeypatch.delenv("CHAINPAY_THREADS")
    assert main(args + ["--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    summary = json.loads(first.read_text())
    assert summary["runs"] == 200 and summary["mean_total_payout"] == 1.0
    assert len(rows.read_text().splitlines()) == 201


def test_config_file_defaults_and_override(capsys, tmp_path):
    cfg = tmp_path / "pay.cfg"
    cfg.write_text("# defaults\nmech = gdgeom:1/2,1/2\nt = 2\n")
    code, out, _ = run(capsys, "pay", "--config", str(cfg))
    assert code == 0 and out == "1/4 1/2\n"
    code, out, _ = run(capsys, "pay", "--config", str(cfg), "--t", "1")
    assert out == "1/2\n"
    cfg.write_text("colour = blue\n")
    code, _, err = run(capsys, "pay", "--config", str(cfg))
    assert code == 2 and "colour" in err


def test_parse_pmf():
    assert parse_pmf("0:1/2,2:0.5") == {0: 0.5, 2: 0.5}


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "chainpay", "pay", "--mech", "topdown", "--t", "2"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout == "1/8 1/16\n"
