import os
import subprocess
import sys

import pytest

from dgbv.cli import EXAMPLES, data_file, run
from dgbv.report import parse_jsonl, parse_text

PD4 = data_file("pd4.dgbv")
INCL = data_file("pd4_inclusion.dgbv")
BV24 = data_file("bv24.dgbv")


def summary(out: bytes) -> dict:
    return parse_text(out.decode())[-1]


@pytest.mark.parametrize("argv", [
    ["validate", PD4], ["qcheck", PD4], ["cohomology", PD4], ["solve-mc", PD4],
    ["solve-mc", PD4, "--class", "y"], ["potential", PD4, "--order", "5"],
    ["wdvv", PD4, "--order", "4"], ["gauge-check", PD4, "--order", "4", "--trials", "2"],
    ["functoriality", INCL, "--order", "4"], ["identify", INCL, "--order", "4"],
    ["validate", "--fixture", "ddbar(2)"], ["wdvv", "--fixture", "trivial(2)"],
    ["validate", BV24],
])
def test_commands_pass(argv):
    code, out, err = run(argv)
    assert code == 0, out.decode() + err
    assert summary(out)["pass"] is True


def test_qcheck_fails_on_bv24():
    code, out, _ = run(["qcheck", BV24])
    assert code == 1
    recs = parse_text(out.decode())
    assert recs[1]["name"] == "q_condition" and recs[1]["pass"] is False


def test_solve_mc_contract_error_is_a_failed_section():
    code, out, _ = run(["solve-mc", BV24, "--order", "3"])
    assert code == 1
    assert any(r.get("name") == "error" for r in parse_text(out.decode()))


def test_validate_detects_mutation(tmp_path):
    text = open(PD4).read().replace("product x X = w", "product x X = 2*w")
    p = tmp_path / "bad.dgbv"
    p.write_text(text)
    code, out, _ = run(["validate", str(p)])
    assert code == 1
    assert summary(out)["failed"]


@pytest.mark.parametrize("argv", [
    ["validate"], ["validate", "/nonexistent/x.dgbv"], ["validate", "--fixture", "nope(1)"],
    ["validate", PD4, "--fixture", "pd4()"], ["solve-mc", PD4, "--order", "0"],
    ["gauge-check", PD4, "--seed", "-1"], ["frobnicate"], ["examples", "nope()"],
])
def test_usage_errors_exit_2(argv):
    code, out, err = run(argv)
    assert code == 2 and not out


def test_malformed_document_exit_2(tmp_path):
    p = tmp_path / "bad.dgbv"
    p.write_text("algebra A\n  basis 1:0 x:2 x:2\nend\n")
    code, out, err = run(["validate", str(p)])
    assert code == 2 and "line 2" in err


def test_examples():
    code, out, _ = run(["examples"])
    assert code == 0 and out.decode().split() == list(EXAMPLES)
    code, out, _ = run(["examples", "pd4()"])
    assert code == 0 and out.decode().startswith("algebra pd4")


def test_order_precedence(monkeypatch):
    monkeypatch.setenv("DGBV_ORDER", "3")
    head = lambda argv: parse_text(run(argv)[1].decode())[0]
    assert head(["solve-mc", "--fixture", "pd4()"])["order"] == 3
    assert head(["solve-mc", "--fixture", "pd4()", "--order", "4"])["order"] == 4
    assert head(["solve-mc", PD4])["order"] == 6   # document directive beats env
    monkeypatch.setenv("DGBV_ORDER", "x")
    assert run(["solve-mc", "--fixture", "pd4()"])[0] == 2


@pytest.mark.parametrize("argv", [["solve-mc", PD4], ["wdvv", PD4, "--order", "4"],
                                  ["gauge-check", PD4, "--order", "4", "--trials", "2"],
                                  ["identify", INCL, "--order", "4"]])
def test_deterministic_and_formats_agree(argv):
    a = run(argv + ["--format", "text"])
    b = run(argv + ["--format", "text"])
    assert a == b
    j = run(argv + ["--format", "jsonl"])
    assert j == run(argv + ["--format", "jsonl"])
    assert parse_text(a[1].decode()) == parse_jsonl(j[1].decode())


def test_console_entry_point():
    env = dict(os.environ, PYTHONPATH=os.path.join(os.path.dirname(__file__), "..", "src"))
    p = subprocess.run([sys.executable, "-m", "dgbv.cli", "qcheck", PD4], capture_output=True,
                       env=env)
    assert p.returncode == 0
    assert p.stdout == run(["qcheck", PD4])[1]
