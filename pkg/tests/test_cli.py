import json
import shutil
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from treemeasure import cli
from treemeasure.automata import builtin, render_automaton
from treemeasure.exact import AlgebraicNumber, ExactSolution
from treemeasure.numeric import NumericSolution

REPORT_SCHEMA = {
    "type": "object",
    "required": ["input", "system", "results", "checks"],
    "properties": {
        "input": {"type": "object"},
        "system": {
            "type": "object",
            "required": ["equations", "class"],
            "properties": {"equations": {"type": "array", "items": {"type": "string"}},
                           "class": {"type": "string"}},
        },
        "results": {
            "type": "object",
            "properties": {
                "numeric": {"type": "object", "required": ["value", "residual", "iterations"]},
                "exact": {
                    "type": "object",
                    "required": ["poly", "interval", "decimal"],
                    "properties": {"interval": {"type": "array", "items": {"type": "string"},
                                                "minItems": 2, "maxItems": 2}},
                },
                "montecarlo": {"type": "object", "required": ["lo", "hi", "n", "depth", "seed"]},
            },
        },
        "checks": {
            "type": "array",
            "items": {"type": "object", "required": ["name", "pass", "detail"]},
        },
    },
}


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    return code, json.loads(out)


def strip_timings(report):
    return {k: v for k, v in report.items() if k != "timings"}


def test_solve_l2(capsys):
    code, rep = run_json(capsys, "solve", "--builtin", "L2", "--exact", "--numeric")
    assert code == 0
    jsonschema.validate(rep, REPORT_SCHEMA)
    assert rep["results"]["exact"]["poly"] == "8 x^2 - 12 x + 1"
    assert rep["results"]["exact"]["decimal"].startswith("0.08856217223")
    assert rep["results"]["numeric"]["value"] == pytest.approx(0.0885621722, abs=1e-9)
    assert rep["system"]["class"] == "all_mu, triangular"
    assert all(c["pass"] for c in rep["checks"])


def test_solve_linf_and_w(capsys):
    code, rep = run_json(capsys, "solve", "--builtin", "Linf")
    assert code == 0 and rep["results"]["exact"]["decimal"] == "0.000000000000"
    assert rep["system"]["class"].startswith("mixed")
    code, rep = run_json(capsys, "solve", "--builtin", "W", "--i", "1", "--k", "3")
    assert code == 0 and rep["results"]["exact"]["value"] == "0"


def test_reports_are_reproducible(capsys):
    a = run_json(capsys, "solve", "--builtin", "L1", "--mc", "--samples", "300", "--depth", "10")[1]
    b = run_json(capsys, "solve", "--builtin", "L1", "--mc", "--samples", "300", "--depth", "10")[1]
    assert strip_timings(a) == strip_timings(b)
    jsonschema.validate(a, REPORT_SCHEMA)
    assert a["results"]["montecarlo"]["seed"] == 0


def test_solve_file_and_text_output(capsys, tmp_path):
    f = tmp_path / "l3.gta"
    f.write_text(render_automaton(builtin("L3")))
    code, out, _ = run(capsys, "solve", "--file", str(f))
    assert code == 0
    assert "256 x^4 - 768 x^3 + 832 x^2 - 384 x + 1" in out


def test_parse_errors_exit_1(capsys, tmp_path):
    f = tmp_path / "bad.gta"
    f.write_text("alphabet a\nstates q\ninitial q\n")
    code, _, err = run(capsys, "solve", "--file", str(f))
    assert code == 1 and "bad.gta" in err
    code, _, err = run(capsys, "validate", "--file", str(f))
    assert code == 1
    code, _, _ = run(capsys, "solve", "--file", str(tmp_path / "missing.gta"))
    assert code == 1
    code, _, _ = run(capsys, "solve", "--builtin", "W", "--i", "1")
    assert code == 1


def test_validate_ok(capsys):
    code, rep = run_json(capsys, "validate", "--builtin", "L2")
    assert code == 0 and rep["ok"] and rep["warnings"]


def test_non_convergence_exit_2(capsys, monkeypatch):
    monkeypatch.setattr(cli, "solve_numeric",
                        lambda s, cfg=None: NumericSolution((0.3,), 0.1, 5, False, ("x1",)))
    code, _, _ = run(capsys, "solve", "--builtin", "L1")
    assert code == 2


def test_disagreement_exit_3(capsys, monkeypatch):
    monkeypatch.setattr(cli, "solve_exact",
                        lambda s: ExactSolution({"x1": AlgebraicNumber.rational(1)}, "forced"))
    code, rep = run_json(capsys, "solve", "--builtin", "L1")
    assert code == 3
    assert not [c for c in rep["checks"] if c["name"] == "exact vs numeric"][0]["pass"]


def test_export_qe(capsys, tmp_path):
    code, out, _ = run(capsys, "export-qe", "--builtin", "L3", "--out-dir", str(tmp_path))
    assert code == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["L3_stage1.qe", "L3_stage2.qe", "L3_stage3.qe"]
    assert "8 x2prime^2 - 12 x2prime + 1 = 0" in (tmp_path / "L3_stage3.qe").read_text()
    code, rep = run_json(capsys, "export-qe", "--builtin", "Linf", "--out-dir", str(tmp_path / "inf"))
    assert code == 0 and len(rep["files"]) == 2
    assert "4 x1prime - 3 <= 0" in Path(rep["files"][1]).read_text()


def test_estimate(capsys):
    code, rep = run_json(capsys, "estimate", "--builtin", "L1", "--depth", "12", "--samples", "500",
                         "--seed", "4")
    assert code == 0 and rep["seed"] == 4 and rep["lo"] <= 0.5 <= rep["hi"]
    code, _, err = run(capsys, "estimate", "--builtin", "Linf", "--samples", "10")
    assert code == 1 and "bracketing unsupported" in err


def test_wik(capsys):
    code, rep = run_json(capsys, "wik", "--i", "1", "--k", "4")
    assert code == 0 and rep["closed_form"] == 1 and rep["pipeline"] == "1" and rep["determinant"] == "-1/4"
    code, _, _ = run(capsys, "wik", "--i", "2", "--k", "1")
    assert code == 1


def test_reproduce(capsys):
    code, rep = run_json(capsys, "reproduce")
    assert code == 0 and rep["total"] == 8 and rep["passed"] == 8
    code, rep = run_json(capsys, "reproduce", "--tol", "1e-2")
    assert code == 0


def test_reproduce_with_corrupted_corpus(capsys, tmp_path):
    shutil.copytree(cli.corpus_dir(), tmp_path / "corpus")
    (tmp_path / "corpus" / "L3.gta").write_text("alphabet a b c\nstates q1 q1\n")
    code, _, err = run(capsys, "reproduce", "--corpus-dir", str(tmp_path / "corpus"))
    assert code == 1 and "L3.gta" in err


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "treemeasure.cli", "solve", "--builtin", "L1", "--json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["exact"]["value"] == "1/2"
