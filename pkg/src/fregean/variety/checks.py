"""Identity checks, structural diagnostics and term-condition searches."""
from __future__ import annotations

import itertools

import numpy as np

from ..algebra import (FiniteAlgebra, check_congruence_orderable, check_one_regular,
                       congruence_lattice, evaluate, is_homomorphism, subalgebra,
                       subalgebras)
from ..errors import CapExceeded, NoDesignatedTerm
from ..terms import App, Var, max_var, substitute
from .free import Closure

# Term conditions as (argument pattern, index of the expected variable) over
# two variables a=0 and b=1.
MALCEV = [((0, 1, 1), 0), ((0, 0, 1), 1)]
MAJORITY = [((0, 0, 1), 0), ((0, 1, 0), 0), ((1, 0, 0), 0)]
PIXLEY = [((0, 1, 1), 0), ((0, 0, 1), 1), ((0, 1, 0), 0)]


def _arity(*terms):
    return max([max_var(t) for t in terms] + [0])


def identity_witness(V, s, t, n=None):
    """None if V satisfies s = t, else the first assignment that separates them."""
    if n is None:
        n = _arity(s, t)
    u, v = V.vector(s, n), V.vector(t, n)
    diff = np.nonzero(u != v)[0]
    if len(diff) == 0:
        return None
    pos = int(diff[0])
    g, ass = V.coordinate(pos, n)
    A = V.generators[g]
    return {"algebra": A.label or f"generator {g}",
            "assignment": {f"x{i + 1}": A.name_of(a) for i, a in enumerate(ass)},
            "lhs": A.name_of(int(u[pos])), "rhs": A.name_of(int(v[pos]))}


def terms_equal(V, s, t):
    """Whether s = t holds in Var(K); exact since it is decided on K."""
    return identity_witness(V, s, t) is None


def free_algebra(V, n):
    if n < 0:
        raise ValueError("n must be nonnegative")
    return V.free(n).build()


def _check_identities(V, pairs):
    for label, lhs, rhs in pairs:
        wit = identity_witness(V, lhs, rhs)
        if wit is not None:
            wit["identity"] = label
            return False, wit
    return True, None


def validate_equivalence_term(V):
    """The equivalential identities plus: a and b are congruent modulo phi
    exactly when a<->b lies in the 1-class of phi, on every generator."""
    if V.equiv_term is None:
        raise NoDesignatedTerm("no equivalence term")
    x, y, z = Var(1), Var(2), Var(3)
    e = V.equiv
    xzz = e(e(x, z), z)
    pairs = [
        ("xxy = y", e(e(x, x), y), y),
        ("xyzz = xz(yz)", e(e(e(x, y), z), z), e(e(x, z), e(y, z))),
        ("xy(xzz)(xzz) = xy", e(e(e(x, y), xzz), xzz), e(x, y)),
        ("xx = 1", e(x, x), V.one()),
    ]
    ok, wit = _check_identities(V, pairs)
    if not ok:
        return ok, wit
    tabs = V._binary_tables("equiv")
    for A, tab in zip(V.generators, tabs):
        lat = congruence_lattice(A, V.caps["max_congruences"])
        for c in lat:
            lab = c.labels
            same = lab[:, None] == lab[None, :]
            in_one = lab[tab] == lab[A.one]
            bad = np.argwhere(same != in_one)
            if len(bad):
                a, b = (int(v) for v in bad[0])
                return False, {"algebra": A.label, "congruence": c.blocks(),
                               "pair": (A.name_of(a), A.name_of(b)),
                               "condition": "principal congruence term"}
    return True, None


def validate_subtractive_term(V):
    if V.subtractive_term is None:
        raise NoDesignatedTerm("no subtractive term")
    x = Var(1)
    return _check_identities(V, [("s(x,x) = 1", V.sub(x, x), V.one()),
                                 ("s(1,x) = x", V.sub(V.one(), x), x)])


def chi_identity_terms(V, t, n=None):
    """Both sides of t(x1yy, ..., xnyy) = t(x1, ..., xn)yy with y = x_{n+1}."""
    if n is None:
        n = max_var(t)
    y = Var(n + 1)
    lhs = substitute(t, {i: V.chi(Var(i), y) for i in range(1, n + 1)})
    return lhs, V.chi(t, y)


def check_chi_identity(V, t, n=None):
    """(ok, witness) for the identity t(x1yy, ..., xnyy) = t(x1, ..., xn)yy."""
    if n is None:
        n = max_var(t)
    lhs, rhs = chi_identity_terms(V, t, n)
    wit = identity_witness(V, lhs, rhs, n + 1)
    return wit is None, wit


def chi_identity_vec(V, u, n):
    """The same identity for an element of F_n given as a vector."""
    y = V.var_vec(n + 1, n + 1)
    imgs = [V.equiv_vec(V.equiv_vec(xi, y, n + 1), y, n + 1) for xi in V.var_vecs(n + 1)[:n]]
    lhs = V.apply(u, imgs, n, n + 1)
    lifted = V.apply(u, V.var_vecs(n + 1)[:n], n, n + 1)
    rhs = V.equiv_vec(V.equiv_vec(lifted, y, n + 1), y, n + 1)
    return bool((lhs == rhs).all())


def check_variety_identities(V):
    """For each basic operation f, whether f(x1yy, ..., xkyy) = f(x1, ..., xk)yy.

    Also reports which generators satisfy all of these identities, i.e.
    belong to the largest subvariety where they hold.
    """
    if V.equiv_term is None:
        raise NoDesignatedTerm("no equivalence term")
    ops = {}
    terms = []
    for name, k in V.signature.operations:
        t = App(name, [Var(i) for i in range(1, k + 1)])
        ok, wit = check_chi_identity(V, t, k)
        ops[name] = {"holds": ok, "witness": wit}
        terms.append((name, t, k))
    members = {}
    for g, A in enumerate(V.generators):
        good = True
        for name, t, k in terms:
            lhs, rhs = chi_identity_terms(V, t, k)
            cols = np.array(list(itertools.product(range(A.size), repeat=k + 1)), np.int64)
            if any(evaluate(lhs, A, row) != evaluate(rhs, A, row) for row in cols):
                good = False
                break
        members[A.label or f"generator {g}"] = good
    return {"holds": all(v["holds"] for v in ops.values()), "operations": ops,
            "members": members}


def _star_closed(Q, star):
    """First operation and argument tuple avoiding star whose value is star."""
    rest = [a for a in range(Q.size) if a != star]
    for name, k in Q.signature.operations:
        tab = Q.tables[name]
        if k == 0:
            if int(tab) == star:
                return name, ()
            continue
        for args in itertools.product(rest, repeat=k):
            if int(tab[args]) == star:
                return name, args
    return None


def si_members_check(V, n_bound):
    """Check that A minus its star is a subuniverse for every SI member found.

    The members are the SI quotients of subalgebras of the generators and
    the SI quotients F_k/eta for k <= n_bound.  When F_k exceeds the cap and
    the variety is certified congruence distributive, the former already
    contain every SI quotient of F_k, so the explicit lattice is skipped.
    """
    sources = []
    for k in range(n_bound + 1):
        F = V.free(k)
        try:
            small = not F.closure.ensure(V.caps["max_explicit_lattice"] + 1)
        except CapExceeded:
            small = False
        if small:
            V.si_view(k, "explicit")
            sources.append(f"F_{k}: explicit congruence lattice")
        elif V.distributivity_witness() is not None:
            sources.append(f"F_{k}: covered by the SI members of HS(K)")
        else:
            raise CapExceeded(f"F_{k} congruence lattice", V.caps["max_explicit_lattice"])
    offenders = []
    checked = []
    for M in V.spectrum():
        Q = M.algebra
        label = Q.label or "/".join(Q.names or [])
        checked.append(label)
        if Q.size <= 2 or M.star is None:
            continue
        bad = _star_closed(Q, M.star)
        if bad is not None:
            name, args = bad
            offenders.append({"algebra": label, "operation": name,
                              "arguments": [Q.name_of(a) for a in args],
                              "value": Q.name_of(M.star)})
    return {"ok": not offenders, "offenders": offenders, "checked": checked,
            "sources": sources}


def two_element_members(V):
    """All 2-element algebras (one = 1) over the signature lying in Var(K).

    Such an algebra is generated by its other element, so it lies in the
    variety iff x1 -> 0 extends to a homomorphism from F_1.
    """
    sig = V.signature
    F = V.free(1).build()
    FA = F.algebra()
    gen = F.generator_elements[0]
    choices = []
    for name, k in sig.operations:
        if name == sig.constant_one:
            choices.append([np.array(1)])
        elif k == 0:
            choices.append([np.array(0), np.array(1)])
        else:
            opts = []
            for bits in itertools.product((0, 1), repeat=2 ** k):
                opts.append(np.array(bits, np.int64).reshape((2,) * k))
            choices.append(opts)
    reps = F.rep_terms
    out = []
    for combo in itertools.product(*choices):
        tables = {name: tab for (name, _), tab in zip(sig.operations, combo)}
        B = FiniteAlgebra(2, 1, tables, signature=sig, names=["0", "1"])
        h = [evaluate(t, B, [0]) for t in reps]
        if h[gen] != 0 or h[0] != 1:
            continue
        if is_homomorphism(FA, B, h):
            B.label = f"B{len(out)}"
            out.append(B)
    return out


def _condition_closure(V, arity, conditions, cap):
    """Closure over the assignments the conditions mention, with one
    (positions, expected values) pair per condition."""
    blocks = []
    wanted = [([], []) for _ in conditions]
    off = 0
    for A in V.generators:
        local = {}
        for c, equations in enumerate(conditions):
            for pattern, target in equations:
                for ab in itertools.product(range(A.size), repeat=2):
                    key = tuple(ab[p] for p in pattern)
                    pos = local.setdefault(key, len(local))
                    wanted[c][0].append(off + pos)
                    wanted[c][1].append(ab[target])
        cols = np.array(list(local), np.int64).T.reshape(arity, -1)
        blocks.append((A, cols))
        off += len(local)
    targets = [(np.array(p, np.int64), np.array(v, np.uint8)) for p, v in wanted]
    return Closure(V.signature, blocks, arity, cap), targets


def search_term_conditions(V, arity, conditions, cap=None):
    """First (position, term) such that the term meets ``conditions[position]``.

    Terms are visited in closure order and earlier conditions win ties within
    a round; (None, None) when the closure completes without a hit.
    """
    cap = V.caps["max_free_size"] if cap is None else cap
    cl, targets = _condition_closure(V, arity, conditions, cap)
    seen = 0
    while True:
        vecs = cl.vecs[seen:cl.N]
        for c, (pos, val) in enumerate(targets):
            hit = np.nonzero((vecs[:, pos] == val).all(axis=1))[0]
            if len(hit):
                return c, cl.term(seen + int(hit[0]))
        seen = cl.N
        if cl.complete or not cl.next_round():
            return None, None


def find_term_condition(V, arity, equations, cap=None):
    """A term m with m(pattern) = expected variable for every equation, or None.

    The search closes the variables under the operations, keeping only the
    coordinates that the equations mention.
    """
    return search_term_conditions(V, arity, [equations], cap)[1]


def find_malcev_element(V):
    """A term m with m(x,y,y) = x and m(x,x,y) = y, or None."""
    return find_term_condition(V, 3, MALCEV)


def fregean_diagnostics(V, n_bound):
    """1-regularity and congruence orderability on the generators, their
    subalgebras and F_k for k <= n_bound.  A bounded check only."""
    entries = []

    def run(label, A):
        lat = congruence_lattice(A, V.caps["max_congruences"])
        reg, rw = check_one_regular(A, lat)
        order, ow = check_congruence_orderable(A)
        entry = {"algebra": label, "size": A.size, "one_regular": reg,
                 "congruence_orderable": order}
        if rw is not None:
            entry["one_regular_witness"] = [c.blocks() for c in rw]
        if ow is not None:
            entry["orderable_witness"] = [A.name_of(a) for a in ow]
        entries.append(entry)

    for g, A in enumerate(V.generators):
        for U in subalgebras(A):
            S, _ = subalgebra(A, U)
            label = A.label or f"generator {g}"
            if len(U) < A.size:
                label += "{" + ",".join(A.name_of(a) for a in U) + "}"
            run(label, S)
    for k in range(n_bound + 1):
        F = V.free(k).build()
        run(f"F_{k}", F.algebra())
    return {"ok": all(e["one_regular"] and e["congruence_orderable"] for e in entries),
            "entries": entries}
