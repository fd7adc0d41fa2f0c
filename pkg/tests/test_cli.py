import io
import json
import os
import subprocess
import sys

import jsonschema
import pytest

from bcslab import cli
from bcslab.rewrite import Certificate

CORPUS = os.path.join(os.path.dirname(__file__), "corpus")


def corpus(name):
    return os.path.join(CORPUS, name)


def call(argv, stdin="", capsys=None, monkeypatch=None):
    """Run the CLI in-process; returns (exit code, stdout, stderr)."""
    monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = cli.run(argv)
    out, err = capsys.readouterr()
    return code, out, err


def validate(obj, schema):
    jsonschema.validate(obj, cli.load_schema(schema))


@pytest.fixture
def sh(capsys, monkeypatch):
    return lambda argv, stdin="": call(argv, stdin, capsys, monkeypatch)


# ---------------------------------------------------------------- pipelines


def test_magic_square_is_classically_unsat(sh):
    code, text, _ = sh(["gen", "magic-square"])
    assert code == 0
    code, out, _ = sh(["solve", "--classical", "-"], text)
    assert code == 1
    data = json.loads(out)
    assert data == {"sat": False, "method": "classical"}
    validate(data, "solve_result")
    code, out, _ = sh(["solve", "--parity", "-"], text)
    assert code == 1 and json.loads(out)["sat"] is False


def test_clifford_assignment_verifies(sh):
    code, bundle, _ = sh(["gen", "clifford", "--rank", "4"])
    assert code == 0
    validate(json.loads(bundle), "assignment")
    code, out, _ = sh(["verify", "--assignment", "-"], bundle)
    assert code == 0
    report = json.loads(out)
    assert report["pass"] is True
    validate(report, "verify_report")


def test_verify_failure_exit_one(sh, tmp_path):
    bundle = {"rep": "pauli", "n": 1, "ops": {"x": "Z", "y": "Z"}, "bcs": "domain pm\nvar x y\nparity x y = 1\n"}
    p = tmp_path / "a.json"
    p.write_text(json.dumps(bundle))
    code, out, _ = sh(["verify", "--assignment", str(p)])
    assert code == 1 and json.loads(out)["pass"] is False


def test_verify_needs_bcs(sh, tmp_path):
    p = tmp_path / "a.json"
    p.write_text(json.dumps({"rep": "pauli", "n": 1, "ops": {"x": "I"}}))
    assert sh(["verify", "--assignment", str(p)])[0] == 2
    b = tmp_path / "b.bcs"
    b.write_text("domain pm\nvar x\nparity x = 0\n")
    assert sh(["verify", "--assignment", str(p), "--bcs", str(b)])[0] == 0


def test_certify_prism(sh):
    code, out, _ = sh(["certify", "--gadget", "prism", "--pair", "a,e", "--degree", "8"])
    assert code == 0
    data = json.loads(out)
    validate(data, "certificate")
    cert = Certificate.from_json(data)
    assert len(cert.proofs) == 9 and cert.verify()


def test_certify_magic_square_anticommute(sh):
    code, out, _ = sh(["certify", "--gadget", "magic-square", "--pair", "x2,x4", "--anticommute", "--degree", "6"])
    assert code == 0 and Certificate.from_json(json.loads(out)).verify()


def test_certify_inconclusive_and_env_cap(sh, monkeypatch):
    monkeypatch.setenv("BCSLAB_DEGREE_CAP", "2")
    code, out, _ = sh(["certify", "--gadget", "prism", "--pair", "a,e"])
    assert code == 1
    data = json.loads(out)
    assert data["inconclusive"] is True and data["degree"] == 2
    validate(data, "inconclusive")
    monkeypatch.setenv("BCSLAB_DEGREE_CAP", "six")
    assert sh(["certify", "--gadget", "prism", "--pair", "a,e"])[0] == 2


def test_certify_from_file(sh):
    code, out, _ = sh(["certify", "--gadget", corpus("onein3.bcs"), "--pair", "x,y", "--degree", "6"])
    assert code == 0 and Certificate.from_json(json.loads(out)).verify()


def test_simulate_and_value_chsh(sh, tmp_path):
    _, game, _ = sh(["gen", "chsh"])
    _, strat, _ = sh(["gen", "chsh", "--emit", "strategy"])
    validate(json.loads(game), "game")
    validate(json.loads(strat), "strategy")
    (tmp_path / "g.json").write_text(game)
    (tmp_path / "s.json").write_text(strat)
    code, out, _ = sh(["simulate", "--game", str(tmp_path / "g.json"), "--strategy", str(tmp_path / "s.json")])
    assert code == 0
    assert abs(float(out) - 0.853553390593) < 1e-9
    code, out, _ = sh(["value", "--classical", "--game", str(tmp_path / "g.json")])
    data = json.loads(out)
    assert data["value"] == "3/4"
    validate(data, "value")


def test_simulate_magic_square_bundle(sh):
    _, bundle, _ = sh(["gen", "magic-square", "--emit", "assignment"])
    code, out, _ = sh(["simulate", "--strategy", "-"], bundle)
    assert code == 0 and abs(float(out) - 1) < 1e-9


def test_value_from_bcs_text(sh):
    code, out, _ = sh(["value", "--classical", "--game", corpus("magic_square.bcs")])
    assert json.loads(out)["value"] == "17/18"


def test_solve_methods(sh):
    code, out, _ = sh(["solve", "--2sat", corpus("twosat.bcs")])
    assert code in (0, 1)
    validate(json.loads(out), "solve_result")
    code, out, _ = sh(["solve", "--horn", corpus("horn_0.bcs")])
    validate(json.loads(out), "solve_result")
    code, out, _ = sh(["solve", corpus("random3sat_0.bcs")])
    assert json.loads(out)["method"] == "classical"


@pytest.mark.parametrize("flags", [["--to", "3coloring"], ["--to", "1in3"], ["--to", "3sat"], ["--harden"], ["--occ-limit", "3"]])
def test_reduce_outputs_and_traces(sh, flags):
    src = corpus("random3sat_1.bcs")
    code, out, _ = sh(["reduce", src, *flags])
    assert code == 0 and out
    code, out, _ = sh(["reduce", src, *flags, "--trace"])
    assert code == 0
    validate(json.loads(out), "trace")


def test_gen_coloring_and_ks(sh, tmp_path):
    g = tmp_path / "k3.graph"
    g.write_text("v a b c\ne a b\ne b c\ne c a\n")
    code, out, _ = sh(["gen", "coloring-bcs", "--input", str(g)])
    assert code == 0 and out.count("\none ") == 3
    s = tmp_path / "ks.txt"
    s.write_text("a b\nb c  # comment\n")
    code, out, _ = sh(["gen", "ks-bcs", "--input", str(s)])
    assert code == 0 and out.count("\none ") == 2


def test_parse_roundtrip(sh):
    with open(corpus("comments.bcs")) as fh:
        text = fh.read()
    code, out, _ = sh(["parse", "-"], text)
    assert code == 0
    assert sh(["parse", "-"], out)[1] == out


# ---------------------------------------------------------------- errors


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate"],
        ["solve", "--bogus"],
        ["gen", "clifford"],
        ["gen", "clifford", "--rank", "40"],
        ["certify", "--gadget", "prism", "--pair", "a"],
        ["certify", "--gadget", "prism", "--pair", "a,zz"],
        ["solve", "/nonexistent/file.bcs"],
        ["reduce", "-"],
        ["simulate", "--strategy", "/nonexistent.json"],
    ],
)
def test_usage_errors_exit_two(sh, argv):
    assert sh(argv)[0] == 2


def test_parse_error_reports_position(sh):
    code, _, err = sh(["parse", "-"], "var x\nclause y\n")
    assert code == 2 and "line 2" in err


def test_reduce_rejects_parity_input(sh):
    assert sh(["reduce", "--to", "1in3", corpus("magic_square.bcs")])[0] == 2


# ---------------------------------------------------------------- determinism


DETERMINISM = [
    ["gen", "magic-square"],
    ["gen", "clifford", "--rank", "5"],
    ["gen", "chsh", "--emit", "bcs"],
    ["solve", "--classical", corpus("random3sat_2.bcs")],
    ["reduce", "--to", "3coloring", corpus("random3sat_0.bcs"), "--trace"],
    ["reduce", "--occ-limit", "3", corpus("heavy.bcs")],
    ["certify", "--gadget", "onein3", "--pair", "x,y", "--degree", "6"],
    ["value", "--classical", "--game", corpus("chsh.bcs")],
]


@pytest.mark.parametrize("argv", DETERMINISM, ids=lambda a: " ".join(a[:3]))
def test_byte_identical_across_runs(sh, argv):
    first = sh(argv)
    second = sh(argv)
    assert first == second


def test_console_script_subprocess():
    # separate interpreters, so hash randomisation cannot leak into output
    argv = [sys.executable, "-m", "bcslab.cli", "reduce", "--to", "1in3", corpus("random3sat_3.bcs"), "--trace"]
    outs = {subprocess.run(argv, capture_output=True, text=True, env={**os.environ, "PYTHONHASHSEED": seed}).stdout for seed in ("1", "2")}
    assert len(outs) == 1
    p = subprocess.run([sys.executable, "-m", "bcslab.cli", "solve", "--classical", "-"], input="domain pm\nvar x\nparity x = 1\n",
                       capture_output=True, text=True)
    assert p.returncode == 0 and json.loads(p.stdout)["assignment"] == {"x": 1}
