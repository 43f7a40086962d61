import dataclasses
import json
import subprocess
import sys

import pytest

from nullcount import cli, gadgets
from nullcount.exact import plan_and_count
from nullcount.model import parse_database
from nullcount.query import parse_query

FIG1 = "dom ?1 : a b c\ndom ?2 : a b\nS(a, b)\nS(?1, a)\nS(a, ?2)\n"
K3 = "nodes: a b c\nedge a b\nedge b c\nedge a c\n"
K4 = "nodes: a b c d\n" + "".join(f"edge {u} {v}\n" for u, v in
                                  [("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"),
                                   ("c", "d")])


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, text in {"fig1.idb": FIG1, "k3.txt": K3, "k4.txt": K4,
                       "f.cnf": "p cnf 3 1\nc3 1 2 3\n",
                       "codd.idb": "dom ?1 : a b\ndom ?2 : b c\nR(?1)\nR(?2)\n",
                       "ac.db": "R(a)\nR(c)\n",
                       "triangle.db": "R(1, 2)\nR(2, 1)\nR(2, 3)\nR(3, 2)\nR(1, 3)\nR(3, 1)\nR(c, c)\n",
                       "bad.idb": "R(?1\n"}.items():
        p = tmp_path / name
        p.write_text(text)
        paths[name] = str(p)
    return paths


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classify_examples(capsys):
    code, out, _ = run(capsys, "classify", "-q", "R(X),S(X)", "--table", "codd",
                       "--domain", "non-uniform", "--problem", "val")
    assert code == 0 and "exact: #P-complete (pattern R(x)∧S(x))" in out
    _, out, _ = run(capsys, "classify", "-q", "R(X,Y)", "--table", "codd", "--domain", "uniform",
                    "--problem", "comp")
    assert "exact: #P-complete" in out and "approx: open" in out
    _, out, _ = run(capsys, "classify", "-q", "R(X),S(Y)", "--domain", "uniform", "--problem", "val")
    assert "exact: FP" in out


def test_classify_parametric(capsys):
    code, out, _ = run(capsys, "classify", "-q", "q(X) := R(X,c), S(X)", "--format", "json")
    payload = json.loads(out)
    assert code == 0 and len(payload["classes"]) == 2


def test_count_examples(capsys, files):
    assert run(capsys, "count", "--db", files["fig1.idb"], "--problem", "val", "-q", "S(X,X)")[1] == "4\n"
    assert run(capsys, "count", "--db", files["fig1.idb"], "--problem", "comp", "-q", "S(X,X)")[1] == "3\n"
    code, _, err = run(capsys, "count", "--db", files["fig1.idb"], "--mode", "approx",
                       "--problem", "comp", "-q", "S(X,X)")
    assert code == 3 and "Never" in err


def test_count_with_tuple(capsys, files):
    code, out, _ = run(capsys, "count", "--db", files["fig1.idb"], "-q", "q(X) := S(X, a)",
                       "--tuple", "a")
    assert code == 0 and out == "4\n"
    code, _, _ = run(capsys, "count", "--db", files["fig1.idb"], "-q", "q(X) := S(X, a)")
    assert code == 2


def test_json_round_trip(capsys, files):
    _, out, _ = run(capsys, "count", "--db", files["fig1.idb"], "-q", "S(X,X)", "--format", "json")
    payload = json.loads(out)
    D = parse_database(FIG1)
    assert isinstance(payload["count"], str)
    assert int(payload["count"]) == plan_and_count(D, parse_query("S(X,X)")).value
    _, out, _ = run(capsys, "count", "--db", files["fig1.idb"], "-q", "S(X,X)", "--mode", "approx",
                    "--format", "json", "--seed", "5")
    payload = json.loads(out)
    num, den = map(int, payload["estimate"].split("/"))
    lib = plan_and_count(D, parse_query("S(X,X)"), mode="approx", seed=5)
    assert (num, den) == (lib.value.numerator, lib.value.denominator)


def test_check_completion(capsys, files, tmp_path):
    assert run(capsys, "check-completion", "--db", files["codd.idb"],
               "--facts", files["ac.db"])[1] == "yes (matching)\n"
    k4 = tmp_path / "k4.idb"
    run(capsys, "gadget", "3col-comp", "--graph", files["k4.txt"], "--out", str(k4))
    assert run(capsys, "check-completion", "--db", str(k4),
               "--facts", files["triangle.db"])[1] == "no (search)\n"
    k3 = tmp_path / "k3.idb"
    run(capsys, "gadget", "3col-comp", "--graph", files["k3.txt"], "--out", str(k3))
    assert run(capsys, "check-completion", "--db", str(k3),
               "--facts", files["triangle.db"])[1] == "yes (search)\n"


def test_gadget_examples(capsys, files):
    code, out, _ = run(capsys, "gadget", "vc", "--graph", files["k3.txt"], "--verify")
    assert code == 0 and out.rstrip().endswith("identity holds: 4 = 4")
    assert "R(?e_a_b)" in out
    _, out, _ = run(capsys, "gadget", "3col-comp", "--graph", files["k3.txt"], "--verify")
    assert "identity holds: 8 = 8" in out
    _, out, _ = run(capsys, "gadget", "k3sat", "--cnf", files["f.cnf"], "--k", "1", "--verify")
    assert "identity holds: 2 = 2" in out


def test_gadget_output_parses(capsys, files, tmp_path):
    target = tmp_path / "vc.idb"
    code, out, _ = run(capsys, "gadget", "vc", "--graph", files["k3.txt"], "--out", str(target))
    assert code == 0 and out == f"wrote {target}\n"
    D = parse_database(target.read_text())
    assert D.is_codd and len(D.facts) == 7


def test_exit_codes(capsys, files, monkeypatch):
    assert run(capsys, "count", "--db", files["bad.idb"], "-q", "R(X)")[0] == 2
    assert run(capsys, "count", "--db", files["fig1.idb"], "-q", "S(X")[0] == 2
    assert run(capsys, "count", "--db", files["fig1.idb"], "-q", "S(X)")[0] == 2
    assert run(capsys, "count", "--db", files["fig1.idb"], "-q", "S(X,X)", "--table", "naive")[0] == 3
    assert run(capsys, "count", "--db", files["fig1.idb"], "-q", "S(X,X)", "--problem", "comp",
               "--mode", "exact")[0] == 3
    assert run(capsys, "count", "--db", files["fig1.idb"], "-q", "S(X,X)", "--problem", "comp",
               "--valuation-cap", "2")[0] == 4
    assert run(capsys, "count", "--db", str(files["fig1.idb"]) + ".missing", "-q", "S(X,X)")[0] == 2

    def broken(G):
        return dataclasses.replace(gadgets.gadget_vc(G), reference=lambda: -1)

    monkeypatch.setitem(gadgets.GADGETS, "vc", broken)
    code, out, _ = run(capsys, "gadget", "vc", "--graph", files["k3.txt"], "--verify")
    assert code == 5 and "identity fails" in out


def test_epsilon_validation(capsys, files):
    with pytest.raises(SystemExit) as exc:
        cli.main(["count", "--db", files["fig1.idb"], "-q", "S(X,X)", "--epsilon", "2"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_identical_invocations_are_byte_identical(files):
    argv = [sys.executable, "-m", "nullcount.cli", "count", "--db", files["fig1.idb"], "-q",
            "S(X,X)", "--mode", "approx", "--seed", "11", "--format", "json"]
    first = subprocess.run(argv, capture_output=True, check=True).stdout
    second = subprocess.run(argv + ["--jobs", "2"], capture_output=True, check=True).stdout
    assert first == second and first
