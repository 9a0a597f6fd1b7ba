"""Command dispatch: golden reports, exit-code contract and determinism."""
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from starmorita.cli import run
from starmorita.workspace import loads

from cli_cases import CASES

GOLDEN = Path(__file__).parent / "golden"


def invoke(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(argv, out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden_reports(name):
    argv, expected = CASES[name]
    code, out, err = invoke(argv)
    assert code == expected, err
    assert out == (GOLDEN / f"{name}.txt").read_text()


def test_reports_are_deterministic():
    argv = CASES["compose_inverse"][0]
    assert invoke(argv)[1] == invoke(argv)[1]


def test_json_framing():
    code, out, _ = invoke(CASES["gns_trace"][0] + ["--json"])
    doc = json.loads(out)
    assert code == 0
    assert doc["data"]["dimension"] == 4
    assert {c["verdict"] for c in doc["checks"]} == {"pass"}
    assert list(doc) == sorted(doc)


def test_emitted_modules_reload():
    _, out, _ = invoke(CASES["json_gns"][0])
    text = json.loads(out)["data"]["module"]
    ws = loads(text)
    assert ws.get("gns").module.rank == 4


@pytest.mark.parametrize("argv,code", [
    (["frobnicate"], 64),
    (["gns", "--workspace", "examples/m2.alg", "--algebra", "m2"], 64),
    (["gns", "--workspace", "examples/m2.alg", "--algebra", "m2", "--functional", "nothing"], 65),
    (["check-positivity", "--workspace", "examples/m2.alg", "--algebra", "m2", "--element", "E11+"], 64),
    (["check-positivity", "--workspace", "examples/nonassoc.alg", "--algebra", "broken", "--element", "a"], 1),
    (["gns", "--workspace", "examples/m2.alg", "--workspace", "examples/duplicate.alg",
      "--algebra", "m2", "--functional", "trace"], 65),
    (["gns", "--workspace", "no/such/file.alg", "--algebra", "m2", "--functional", "trace"], 64),
])
def test_exit_codes(argv, code):
    assert invoke(argv)[0] == code


def test_unknown_is_exit_two():
    # the budget caps the lift search before any order-1 correction is tried
    argv = ["deform-functional", "--workspace", "examples/moyal.alg", "--functional", "delta",
            "--star-product", "moyal2", "--order", "1", "--test-degree", "1", "--budget", "1"]
    code, out, _ = invoke(argv)
    assert code == 2
    assert "lift_found: unknown" in out


def test_budget_from_environment(monkeypatch):
    argv = CASES["gns_trace"][0]
    monkeypatch.setenv("STARMORITA_BUDGET", "lots")
    assert invoke(argv)[0] == 64
    monkeypatch.setenv("STARMORITA_BUDGET", "32")
    assert invoke(argv)[0] == 0


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "starmorita", *CASES["gns_eval"][0]],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.rstrip("\n") == (GOLDEN / "gns_eval.txt").read_text().rstrip("\n")
