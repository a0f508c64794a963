import itertools

import numpy as np
import pytest

from fregean.algebra import (FiniteAlgebra, all_homomorphisms, check_congruence_orderable,
                             check_one_regular, check_permuting, congruence_lattice, direct_product,
                             endomorphisms, evaluate, exists_epi, filters, is_homomorphism,
                             meet_irreducible_filters, one_generated_meet_irreducibles,
                             principal_congruence, quotient, subdirectly_irreducible)
from fregean.errors import CapExceeded, MissingAssignment


def set_partitions(n):
    """Every partition of range(n) as a normalized label array (oracle)."""
    def rec(i, labels, k):
        if i == n:
            yield tuple(labels)
            return
        for b in range(k + 1):
            yield from rec(i + 1, labels + [b], max(k, b + 1))
    yield from rec(0, [], 0)


def compatible(A, lab):
    lab = np.asarray(lab)
    for name, k in A.signature.operations:
        tab = np.asarray(A.tables[name])
        if k == 0:
            continue
        for u in itertools.product(range(A.size), repeat=k):
            for v in itertools.product(range(A.size), repeat=k):
                if all(lab[a] == lab[b] for a, b in zip(u, v)) and lab[tab[u]] != lab[tab[v]]:
                    return False
    return True


@pytest.fixture(scope="module")
def H5(ctx):
    return ctx("heyting-h5").generators[0]


@pytest.fixture(scope="module")
def B2(ctx):
    return ctx("boolean-group").generators[0]


def one_element(sig):
    return FiniteAlgebra(1, 0, {name: np.zeros((1,) * k, np.int64) for name, k in sig.operations},
                         signature=sig)


def test_evaluate_h5_counterexample(ctx, H5):
    V = ctx("heyting-h5")
    t = V.parse("e(x2,j(x1,i(x1,0)))")
    a, c, one = H5.element("a"), H5.element("c"), H5.element("1")
    assert evaluate(t, H5, [a, one]) == c
    assert evaluate(V.chi(t, V.parse("0")), H5, [a, one]) == one
    assert evaluate(V.parse("e(x1,x1)"), H5, [a]) == one
    with pytest.raises(MissingAssignment):
        evaluate(t, H5, [a])


def test_principal_congruences(H5, B2):
    assert principal_congruence(H5, 1, 1).is_identity()
    assert principal_congruence(B2, 0, 1).is_total()
    c, one = H5.element("c"), H5.element("1")
    assert principal_congruence(H5, c, one).blocks() == [[0], [1], [2], [3, 4]]


def test_lattice_matches_partition_oracle(ctx, H5, B2):
    for A in [H5, B2] + ctx("equiv").generators + ctx("goedel3").generators:
        oracle = {p for p in set_partitions(A.size) if compatible(A, p)}
        lat = congruence_lattice(A)
        got = {tuple(c.labels.tolist()) for c in lat}
        assert got == oracle, A.label


def test_lattice_examples(H5, B2):
    assert len(congruence_lattice(B2)) == 2
    assert len(congruence_lattice(one_element(B2.signature))) == 1
    atoms = congruence_lattice(H5).atoms()
    assert [a.blocks() for a in atoms] == [[[0], [1], [2], [3, 4]]]


def test_lattice_cap(ctx):
    F = ctx("equiv").free(2).build().algebra()
    with pytest.raises(CapExceeded):
        congruence_lattice(F, cap=3)


def test_meet_irreducible_filters(B2, ctx):
    mi = meet_irreducible_filters(B2)
    assert [(sorted(e.members), sorted(p.members)) for e, p in mi] == [([1], [0, 1])]
    F2 = ctx("boolean-group").free(2).build().algebra()
    mi = meet_irreducible_filters(F2)
    assert len(mi) == 3
    for eta, _ in mi:
        assert quotient(F2, eta.congruence)[0].size == 2


def test_trivial_filter_is_meet_irreducible_in_si(H5):
    info = subdirectly_irreducible(H5)
    mi = dict((e, p) for e, p in meet_irreducible_filters(H5))
    trivial = [e for e in mi if len(e) == 1]
    assert trivial and sorted(mi[trivial[0]].members) == sorted(
        np.nonzero(info.monolith.labels == info.monolith.labels[H5.one])[0].tolist())


def test_one_generated_meet_irreducibles_agree(ctx):
    for name, n in [("equiv", 2), ("equiv0", 2), ("brouwerian", 2), ("goedel3", 1)]:
        A = ctx(name).free(n).build().algebra()
        full = {tuple(c.labels.tolist()) for c, _ in congruence_lattice(A).meet_irreducibles()}
        pairs, _ = one_generated_meet_irreducibles(A)
        assert {tuple(c.labels.tolist()) for c, _ in pairs} == full, name


def test_subdirectly_irreducible(H5, B2):
    assert H5.name_of(subdirectly_irreducible(H5).star) == "c"
    assert subdirectly_irreducible(B2).star == 0
    assert subdirectly_irreducible(direct_product(B2, B2)) is None


def test_quotients(H5):
    lat = congruence_lattice(H5)
    Q, nat = quotient(H5, lat.bottom())
    assert Q.size == H5.size and is_homomorphism(H5, Q, nat)
    assert quotient(H5, lat.top())[0].size == 1
    Q, nat = quotient(H5, subdirectly_irreducible(H5).monolith)
    assert Q.size == 4 and nat[3] == nat[4]
    assert is_homomorphism(H5, Q, nat)


def test_homomorphism_search(B2):
    # oracle: all 4 maps {0,1} -> {0,1}
    brute = [h for h in itertools.product(range(2), repeat=2) if is_homomorphism(B2, B2, h)]
    got = sorted(h.map for h in endomorphisms(B2))
    assert got == sorted(brute) == [(0, 1), (1, 1)]
    one = one_element(B2.signature)
    assert exists_epi(B2, one)
    assert not exists_epi(one, B2)


def test_all_homomorphisms_match_brute_force(ctx):
    V = ctx("goedel3")
    A = V.generators[0]
    F1 = V.free(1).build().algebra()
    brute = [h for h in itertools.product(range(A.size), repeat=F1.size)
             if is_homomorphism(F1, A, h)]
    got = sorted(h.map for h in all_homomorphisms(F1, A))
    assert got == sorted(brute)
    assert len(got) == A.size       # F_1 is free on one generator


def test_diagnostics(H5, semilattice):
    assert check_one_regular(H5)[0]
    assert check_congruence_orderable(H5)[0]
    assert check_permuting(H5)[0]
    S = semilattice.generators[0]
    P = direct_product(S, S)
    ok, wit = check_permuting(P)
    assert not ok
    alpha, beta, (x, z) = wit
    # (x, z) in alpha o beta but not in beta o alpha
    ab = (alpha.matrix().astype(int) @ beta.matrix().astype(int)) > 0
    ba = (beta.matrix().astype(int) @ alpha.matrix().astype(int)) > 0
    assert ab[x, z] and not ba[x, z]
    one = one_element(H5.signature)
    assert check_one_regular(one)[0] and check_congruence_orderable(one)[0] \
        and check_permuting(one)[0]


def test_json_round_trip(H5):
    A = FiniteAlgebra.from_json(H5.to_json(), signature=H5.signature)
    for name, _ in H5.signature.operations:
        assert (A.tables[name] == H5.tables[name]).all()
    with pytest.raises(ValueError):
        FiniteAlgebra(2, 1, {"m": np.array([[0, 2], [0, 1]]), "1": np.array(1)})


def test_filters_are_one_cosets(H5):
    fs = filters(H5)
    assert len(fs) == len(congruence_lattice(H5))
    assert all(H5.one in f for f in fs)
