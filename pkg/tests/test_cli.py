import json

import pytest

from fregean.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv, "--json")
    return code, json.loads(out)


def test_check_boolean(capsys):
    code, d = run_json(capsys, "check", "boolean-group")
    assert code == 0
    assert all(v["pass"] for v in d["verdicts"])


def test_check_h5_fails_with_witness(capsys):
    code, d = run_json(capsys, "check", "heyting-h5", "--si-bound", "1")
    assert code == 1
    failed = [v for v in d["verdicts"] if not v["pass"]]
    assert failed and all(v.get("witness") for v in failed)
    assert any("j" in json.dumps(v["witness"]) for v in failed)


def test_check_malformed_file(capsys, tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    code, d = run_json(capsys, "check", "--context", str(p))
    assert code == 2 and "error" in d
    code, _ = run(capsys, "check", "no-such-context")
    assert code == 2


def test_unify_equiv_projective(capsys):
    code, d = run_json(capsys, "unify", "equiv", "x1x2", "--projective", "--verify-mgu", "2")
    assert code == 0 and d["unifiable"]
    cert = d["certificates"][0]
    assert cert["verified"] and cert["kind"] == "projective"
    assert cert["tau"][0] == cert["tau"][1]
    assert all(v["pass"] for v in d["verdicts"])


def test_unify_not_unifiable(capsys):
    code, d = run_json(capsys, "unify", "goedel3", "0")
    assert code == 1 and not d["unifiable"]
    assert d["conditions"]["witnesses"]["cond4"] == {"constant": "0"}
    assert d["certificates"] == []


def test_unify_hilbert0_subtractive(capsys):
    code, d = run_json(capsys, "unify", "hilbert0-h", "i(x1,i(x2,0))", "--method", "subtractive")
    assert code == 3
    assert d["kind"] == "PreconditionFailed" and d["condition"] == "special_unifier"
    assert "certificates" not in d


def test_unify_bad_term(capsys):
    code, d = run_json(capsys, "unify", "equiv", "e(x1,")
    assert code == 2


def test_solve(capsys, tmp_path):
    p = tmp_path / "eq.json"
    p.write_text(json.dumps([["x1", "x2"], ["x2", "x3"]]))
    code, d = run_json(capsys, "solve", "boolean-group", str(p))
    assert code == 0
    cert = d["certificates"][0]
    assert cert["verified"] and len(set(cert["tau"])) == 1
    p.write_text(json.dumps([["x1", "x1"]]))
    code, d = run_json(capsys, "solve", "boolean-group", str(p))
    assert code == 0 and d["certificates"][0]["tau"] == ["x1"]
    p.write_text(json.dumps([["0", "1"]]))
    code, d = run_json(capsys, "solve", "goedel3", str(p))
    assert code == 1 and d["kind"] == "NotUnifiable"


def test_free(capsys):
    code, d = run_json(capsys, "free", "boolean-group", "2")
    assert code == 0 and d["size"] == 4
    code, d = run_json(capsys, "free", "boolean-group", "0")
    assert code == 0 and d["size"] == 1
    code, d = run_json(capsys, "free", "equiv", "3", "--fm")
    assert code == 0 and len(d["meet_irreducibles"]) == 19
    assert all(v["pass"] for v in d["verdicts"])


def test_free_cap(capsys):
    code, d = run_json(capsys, "free", "equiv", "3", "--cap-free", "50")
    assert code == 3 and d["kind"] == "CapExceeded"


def test_certify_roundtrip(capsys, tmp_path):
    code, out = run(capsys, "unify", "boolean-group", "e(x1,x2)", "--projective", "--json")
    p = tmp_path / "cert.json"
    p.write_text(json.dumps(json.loads(out)["certificates"][0]))
    code, d = run_json(capsys, "certify", "boolean-group", str(p), "--verify-mgu", "2")
    assert code == 0 and all(v["pass"] for v in d["verdicts"])
    p.write_text(json.dumps({"term": "e(x1,x2)", "tau": ["1", "1"], "kind": "projective",
                             "provenance": "brute_force"}))
    code, d = run_json(capsys, "certify", "boolean-group", str(p))
    assert code == 1


@pytest.mark.parametrize("argv", [
    ("unify", "equiv", "e(x1,e(x2,x3))", "--projective"),
    ("check", "goedel3"),
    ("free", "equiv0", "2", "--fm"),
])
def test_json_is_deterministic(capsys, argv):
    a = run(capsys, *argv, "--json")
    b = run(capsys, *argv, "--json", "--seed", "99")
    assert a == b


def test_exit_code_follows_verdicts(capsys):
    for argv in [("check", "boolean-group"), ("check", "heyting-h5", "--si-bound", "1"),
                 ("unify", "equiv", "x1")]:
        code, d = run_json(capsys, *argv)
        assert code == (0 if all(v["pass"] for v in d["verdicts"]) else 1)
