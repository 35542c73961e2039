from __future__ import annotations

import csv
import json

import pytest

from bestprox import cli
from bestprox.corpus import NAMES


def run(capsys, *args):
    code = cli.main(list(args))
    out, err = capsys.readouterr()
    return code, out, err


def test_check_p_property_fails(capsys):
    code, out, _ = run(capsys, "check", "--builtin", "ex1_7_F2", "--def", "p-property")
    assert code == cli.EXIT_FAIL
    assert "p-property: fails" in out and "witness:" in out


def test_solve_converges(capsys):
    code, out, _ = run(capsys, "solve", "--builtin", "ex_thm1")
    assert code == cli.EXIT_OK
    assert "converged" in out and "final point: (0, 0)" in out


def test_missing_file(capsys):
    code, _, err = run(capsys, "check", "--file", "missing.prob")
    assert code == cli.EXIT_NOT_FOUND and "missing.prob" in err


def test_invalid_file(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text("schema_version: 1\ndimension: 1\nsets: {Re: {points: [[0]]}, Om: {points: [[0]]}}\n"
                    "phi: a1 - c1\nF:\n- value: [a1]\n")
    code, _, err = run(capsys, "check", "--file", str(path))
    assert code == cli.EXIT_PARSE and "line 4" in err


def test_evaluation_error(tmp_path, capsys):
    path = tmp_path / "div.yaml"
    path.write_text("schema_version: 1\ndimension: 1\nsets: {Re: {points: [[0]]}, Om: {points: [[0]]}}\n"
                    "phi: 1 / (a1 - b1)\nF:\n- value: [a1]\n")
    code, _, err = run(capsys, "check", "--file", str(path))
    assert code == cli.EXIT_EVAL and "division by zero" in err


@pytest.mark.parametrize(
    "args",
    [("check", "--builtin", "ex1_10", "--def", "nope"),
     ("check",),
     ("check", "--builtin", "nope"),
     ("solve", "--builtin", "ex_thm1", "--eps-eq", "0"),
     ("validate",)],
)
def test_usage_errors(capsys, args):
    code, _, _ = run(capsys, *args)
    assert code == cli.EXIT_USAGE


def test_argparse_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["check", "--builtin", "ex1_10", "--file", "x"])
    assert info.value.code == cli.EXIT_USAGE
    with pytest.raises(SystemExit) as info:
        cli.main(["solve", "--builtin", "ex_thm1", "--max-iters", "0"])
    assert info.value.code == cli.EXIT_USAGE


def test_help_documents_defaults(capsys):
    with pytest.raises(SystemExit):
        cli.main(["solve", "--help"])
    out = capsys.readouterr().out
    assert "1e-09" in out and "10000" in out


def test_trace_export_and_rate(tmp_path, capsys):
    path = tmp_path / "trace.csv"
    code, out, _ = run(capsys, "solve", "--builtin", "ex_thm2", "--start", "0,-1", "--trace", str(path),
                       "--rate", "--format", "structured")
    assert code == cli.EXIT_OK
    doc = json.loads(out)
    assert doc["solve"]["rate"]["holds"]
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["n", "x1", "x2", "step_gap", "feasibility_error"]
    assert [float(v) for v in rows[1][1:3]] == [0.0, -1.0]


def test_oracle_command(capsys):
    code, out, _ = run(capsys, "oracle", "--builtin", "ex_thm2")
    assert code == cli.EXIT_OK and "agreement: agree" in out


def test_corpus_command_and_export(tmp_path, capsys):
    code, out, _ = run(capsys, "corpus")
    assert code == cli.EXIT_OK and "8 of 8 entries pass" in out
    code, out, _ = run(capsys, "corpus", "--export", str(tmp_path))
    assert code == cli.EXIT_OK
    code, out, _ = run(capsys, "validate", "--file", str(tmp_path / "ex_thm1.yaml"))
    assert code == cli.EXIT_OK and "valid" in out


def test_eps_override(capsys):
    code, out, _ = run(capsys, "check", "--builtin", "ex1_10", "--eps-eq", "1e-6", "--format", "structured")
    assert json.loads(out)["instance"]["eps_eq"] == 1e-6


REQUIRED = {"definition", "verdict", "min_c", "witness", "lhs", "rhs", "pairs_scanned", "details"}


@pytest.mark.parametrize("name", NAMES)
def test_structured_schema_and_exit_contract(name, capsys):
    code, out, _ = run(capsys, "check", "--builtin", name, "--format", "structured")
    doc = json.loads(out)
    assert doc["schema_version"] == 1 and doc["command"] == "check"
    assert set(doc["instance"]) == {"name", "dimension", "Re_size", "Om_size", "eps_eq"}
    assert isinstance(doc["d_phi"], float) and isinstance(doc["warnings"], list)
    for rep in doc["reports"]:
        assert set(rep) == REQUIRED
        assert rep["verdict"] in ("holds", "fails", "vacuous")
        assert isinstance(rep["pairs_scanned"], int)
    verdicts = {r["verdict"] for r in doc["reports"]}
    assert (code == cli.EXIT_OK) == ("fails" not in verdicts)


@pytest.mark.parametrize("command", ["solve", "oracle"])
@pytest.mark.parametrize("name", NAMES)
def test_structured_solve_oracle_parse(command, name, capsys):
    code, out, _ = run(capsys, command, "--builtin", name, "--format", "structured")
    doc = json.loads(out)
    assert doc["solve"]["status"] in ("converged", "max_iters", "infeasible_step")
    if command == "oracle":
        assert doc["oracle"]["verdict"] in ("agree", "disagree")
        assert (code == cli.EXIT_OK) == (doc["oracle"]["verdict"] == "agree")
    else:
        assert (code == cli.EXIT_OK) == (doc["solve"]["status"] == "converged")


def test_corpus_structured_deterministic_across_threads(capsys):
    outs = []
    for threads in ("1", "4", "1"):
        code, out, _ = run(capsys, "corpus", "--format", "structured", "--threads", threads)
        assert code == cli.EXIT_OK
        outs.append(out)
    assert outs[0] == outs[1] == outs[2]
    doc = json.loads(outs[0])
    assert doc["summary"] == {"total": 8, "passed": 8}
