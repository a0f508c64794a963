import pytest
from hypothesis import given, settings, strategies as st

from fregean.errors import ArityMismatch, TermSyntaxError, UnknownSymbol
from fregean.terms import (App, Signature, Var, compose, format_term, max_var, parse_term,
                           substitute, term_depth, term_size, variables)

EQ = Signature([("e", 2), ("1", 0)], equiv_symbol="e")
HEY = Signature([("i", 2), ("m", 2), ("j", 2), ("0", 0), ("1", 0)],
                derived={"e": (2, "m(i(x1,x2),i(x2,x1))")}, equiv_symbol="e",
                subtractive_symbol="i")


def terms(sig, nvars=3, depth=5):
    leaves = st.one_of(st.integers(1, nvars).map(Var),
                       st.sampled_from([App(c) for c in sig.constants()]))
    ops = [(n, k) for n, k in sig.operations if k > 0]

    def extend(children):
        return st.one_of([st.tuples(*[children] * k).map(lambda a, n=n: App(n, a))
                          for n, k in ops])
    return st.recursive(leaves, extend, max_leaves=2 ** depth).filter(
        lambda t: term_depth(t) <= depth)


def test_shorthand_associates_left():
    assert parse_term("xxy", EQ) == App("e", [App("e", [Var(1), Var(1)]), Var(2)])
    assert parse_term("x1 x2 (x1 x3)", EQ) == parse_term("e(e(x1,x2),e(x1,x3))", EQ)


def test_constant_and_arity():
    assert parse_term("1", EQ) == App("1")
    with pytest.raises(ArityMismatch):
        parse_term("e(x1, x2, x3)", EQ)


def test_errors_carry_offsets():
    with pytest.raises(TermSyntaxError) as exc:
        parse_term("e(x1,", EQ)
    assert exc.value.offset == 5
    with pytest.raises(UnknownSymbol):
        parse_term("f(x1)", EQ)
    # juxtaposition needs an equivalence symbol
    plain = Signature([("i", 2), ("1", 0)])
    with pytest.raises(TermSyntaxError):
        parse_term("x1x2", plain)


def test_unknown_symbol_offset():
    with pytest.raises(UnknownSymbol) as exc:
        parse_term("e(x1,é)", EQ)
    assert exc.value.offset == 5


def test_substitute_examples():
    t = parse_term("e(x1,x2)", EQ)
    assert substitute(t, {2: Var(1)}) == parse_term("e(x1,x1)", EQ)
    assert substitute(t, {}) is t
    # the g_C map on p: x1 -> x1 p, x2 -> x2 p p
    p = t
    g = {1: App("e", [Var(1), p]), 2: App("e", [App("e", [Var(2), p]), p])}
    assert format_term(substitute(p, g), EQ) == \
        "e(e(x1,e(x1,x2)),e(e(x2,e(x1,x2)),e(x1,x2)))"


def test_variables_and_sizes():
    assert variables(App("1")) == []
    assert variables(parse_term("e(x2,x1)", EQ)) == [1, 2]
    assert variables(parse_term("x1x1", EQ)) == [1]
    assert max_var(parse_term("e(x3,1)", EQ)) == 3
    t = parse_term("e(e(x1,x2),x1)", EQ)
    assert term_depth(t) == 2 and term_size(t) == 5


@settings(max_examples=200, deadline=None)
@given(terms(HEY))
def test_round_trip_explicit(t):
    assert parse_term(format_term(t, HEY), HEY) == t


@settings(max_examples=200, deadline=None)
@given(terms(EQ))
def test_round_trip_shorthand(t):
    assert parse_term(format_term(t, EQ, shorthand=True), EQ) == t
    assert parse_term(format_term(t, EQ), EQ) == t


@settings(max_examples=100, deadline=None)
@given(terms(HEY, depth=3), terms(HEY, depth=2), terms(HEY, depth=2), terms(HEY, depth=2))
def test_substitution_composes(t, a, b, c):
    sigma = {1: a, 2: b}
    tau = {1: c, 3: b}
    assert substitute(substitute(t, sigma), tau) == substitute(t, compose(tau, sigma))


def test_shorthand_and_explicit_agree_exhaustively():
    # every term of depth <= 3 over x1, x2 and 1
    level = [Var(1), Var(2), App("1")]
    seen = list(level)
    for _ in range(2):
        level = [App("e", [a, b]) for a in seen for b in seen]
        seen = list(dict.fromkeys(seen + level))
    for t in seen:
        short = format_term(t, EQ, shorthand=True)
        assert parse_term(short, EQ) == parse_term(format_term(t, EQ), EQ) == t
