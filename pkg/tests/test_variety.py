import itertools

import numpy as np
import pytest

from fregean.algebra import FiniteAlgebra, evaluate
from fregean.errors import CapExceeded, InvalidContext
from fregean.terms import Signature
from fregean.variety import (VarietyContext, check_chi_identity, check_variety_identities,
                             find_malcev_element, fregean_diagnostics, identity_witness,
                             load_context, si_members_check, terms_equal, two_element_members,
                             validate_equivalence_term, validate_subtractive_term)
from fregean.variety.builtins import h5_algebra, heyting_signature
from fregean.variety.extensions import extends_to_hom

# sizes of F_0..F_3 recorded after the first verified computation
FREE_SIZES = {
    "boolean-group": [1, 2, 4, 8],
    "equiv": [1, 2, 9, 640],
    "equiv0": [2, 6, 45, 5425],
    "brouwerian": [1, 2, 18],
    "goedel3": [2, 6, 162],
    "hilbert0-h": [2, 6, 70],
    "heyting-h5": [2, 8],
}


def test_terms_equal(ctx):
    E = ctx("equiv")
    assert terms_equal(E, E.parse("xxy"), E.parse("y"))
    t = E.parse("x1 x2 (x1 x3)")
    assert terms_equal(E, t, t)
    H = ctx("heyting-h5")
    lhs = H.parse("j(e(e(x1,0),0),e(e(x2,0),0))")
    rhs = H.parse("e(e(j(x1,x2),0),0)")
    assert not terms_equal(H, lhs, rhs)
    wit = identity_witness(H, lhs, rhs)
    assert wit["assignment"] == {"x1": "a", "x2": "b"}
    assert (wit["lhs"], wit["rhs"]) == ("c", "1")


@pytest.mark.parametrize("name", sorted(FREE_SIZES))
def test_free_sizes(ctx, name):
    V = ctx(name)
    assert [V.free(n).size for n in range(len(FREE_SIZES[name]))] == FREE_SIZES[name]


def test_free_algebra_invariants(ctx):
    for name in ["boolean-group", "equiv0", "goedel3"]:
        V = ctx(name)
        F = V.free(2).build()
        vecs = F.vectors
        assert len(np.unique(vecs, axis=0)) == F.size
        assert (vecs[0] == V.one_vec(2)).all()
        for i in range(F.size):
            assert (V.vector(F.rep_term(i), 2) == vecs[i]).all()
        assert [int(g) for g in F.generator_elements] == \
            [F.index_of(x) for x in V.var_vecs(2)]


def test_free_algebra_universality(ctx):
    # every assignment of the generators into a generating algebra extends
    for name in ["boolean-group", "equiv", "equiv0", "brouwerian", "goedel3"]:
        V = ctx(name)
        for n in (1, 2):
            F = V.free(n).build()
            for A in V.generators:
                for q in itertools.product(range(A.size), repeat=n):
                    ok, h = extends_to_hom(F, A, list(q))
                    assert ok
                    # the extension is the evaluation of representative terms
                    assert all(h[i] == evaluate(F.rep_term(i), A, q) for i in range(F.size))


def test_free_cap(ctx):
    V = load_context("equiv", caps={"max_free_size": 100})
    with pytest.raises(CapExceeded):
        V.free(3).build()


def test_validate_equivalence_term(ctx):
    assert validate_equivalence_term(ctx("boolean-group"))[0]
    assert validate_equivalence_term(ctx("heyting-h5"))[0]
    sig = heyting_signature()
    bad = VarietyContext("h5-meet", sig, [h5_algebra(sig)], equiv_term="m(x1,x2)",
                         validate=False)
    ok, wit = validate_equivalence_term(bad)
    assert not ok
    assert wit["identity"] == "xxy = y" and wit["assignment"] == {"x1": "0", "x2": "a"}
    with pytest.raises(InvalidContext):
        VarietyContext("h5-meet", sig, [h5_algebra(sig)], equiv_term="m(x1,x2)")


def test_validate_subtractive_term(ctx):
    assert validate_subtractive_term(ctx("brouwerian"))[0]
    assert validate_subtractive_term(ctx("equiv"))[0]
    sig = heyting_signature()
    bad = VarietyContext("h5-join", sig, [h5_algebra(sig)], subtractive_term="j(x1,x2)",
                         validate=False)
    ok, wit = validate_subtractive_term(bad)
    assert not ok and wit["identity"] == "s(x,x) = 1" and wit["assignment"] == {"x1": "0"}


def test_check_chi_identity(ctx):
    H = ctx("heyting-h5")
    assert not check_chi_identity(H, H.parse("e(x2,j(x1,i(x1,0)))"))[0]
    assert check_chi_identity(H, H.parse("x1"))[0]
    E = ctx("equiv")
    F = E.free(2).build()
    for i in range(F.size):
        assert check_chi_identity(E, F.rep_term(i), 2)[0]


def test_check_variety_identities(ctx):
    rep = check_variety_identities(ctx("heyting-h5"))
    assert not rep["holds"] and not rep["operations"]["j"]["holds"]
    assert rep["members"] == {"H5": False}
    rep = check_variety_identities(ctx("goedel3"))
    assert rep["holds"] and all(v["holds"] for v in rep["operations"].values())
    assert check_variety_identities(ctx("equiv0"))["holds"]


def test_si_members_check(ctx):
    rep = si_members_check(ctx("boolean-group"), 2)
    assert rep["ok"] and rep["offenders"] == []
    rep = si_members_check(ctx("heyting-h5"), 1)
    assert not rep["ok"]
    off = rep["offenders"][0]
    assert off["operation"] == "j" and sorted(off["arguments"]) == ["a", "b"]
    assert off["value"] == "c"
    assert si_members_check(ctx("goedel3"), 2)["ok"]


def test_two_element_members(ctx):
    B = two_element_members(ctx("boolean-group"))
    assert len(B) == 1 and B[0].tables["e"].tolist() == [[1, 0], [0, 1]]
    H = two_element_members(ctx("heyting-h5"))
    assert len(H) == 1 and H[0].tables["i"].tolist() == [[1, 1], [0, 1]]
    sig = Signature([("e", 2), ("1", 0)], equiv_symbol="e")
    triv = VarietyContext("trivial", sig, [FiniteAlgebra(1, 0, {"e": np.zeros((1, 1)),
                                                                "1": np.array(0)}, sig)],
                          equiv_term="e(x1,x2)")
    assert two_element_members(triv) == []
    assert find_malcev_element(triv) is not None


def test_find_malcev_element(ctx, semilattice):
    V = ctx("boolean-group")
    m = find_malcev_element(V)
    assert terms_equal(V, m, V.parse("e(e(x1,x2),x3)"))
    assert find_malcev_element(semilattice) is None


def test_fregean_diagnostics(ctx):
    assert fregean_diagnostics(ctx("boolean-group"), 2)["ok"]
    assert fregean_diagnostics(ctx("heyting-h5"), 1)["ok"]
    # a pointed set: identity and {a,b}{1} share the 1-class
    sig = Signature([("1", 0)])
    P = FiniteAlgebra(3, 2, {"1": np.array(2)}, signature=sig, names=["a", "b", "1"],
                      label="P3")
    rep = fregean_diagnostics(VarietyContext("pointed", sig, [P]), 0)
    bad = [e for e in rep["entries"] if not e["one_regular"]]
    assert not rep["ok"] and [e["algebra"] for e in bad] == ["P3"]
    assert bad[0]["one_regular_witness"] == [[[0], [1], [2]], [[0, 1], [2]]]
    # swapping a and b makes a and b generate the same congruence with 1
    sig = Signature([("f", 1), ("1", 0)])
    Q = FiniteAlgebra(3, 2, {"f": np.array([1, 0, 2]), "1": np.array(2)}, signature=sig,
                      names=["a", "b", "1"], label="Q3")
    rep = fregean_diagnostics(VarietyContext("swap", sig, [Q]), 0)
    bad = [e for e in rep["entries"] if not e["congruence_orderable"]]
    assert [e["algebra"] for e in bad] == ["Q3"]
    assert sorted(bad[0]["orderable_witness"]) == ["a", "b"]


def test_context_file(tmp_path, ctx):
    B2 = ctx("boolean-group").generators[0]
    (tmp_path / "b2.json").write_text(__import__("json").dumps(B2.to_json()))
    (tmp_path / "ctx.json").write_text(__import__("json").dumps({
        "signature": ctx("boolean-group").signature.to_json(),
        "generators": ["b2.json"], "equiv_term": "e(x1,x2)"}))
    V = load_context(str(tmp_path / "ctx.json"))
    assert V.free(2).size == 4
    (tmp_path / "bad.json").write_text("{")
    with pytest.raises(InvalidContext):
        load_context(str(tmp_path / "bad.json"))
