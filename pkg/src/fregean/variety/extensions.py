"""Exact lists of n-generated subdirectly irreducibles by one-point extension.

Let Q be SI in a congruence permutable Fregean variety whose operations
commute with every chi_y, and |Q| > 2.  Then Q minus its star is a
subuniverse, so some generator of Q is the star, and the natural map
identifies Q minus star with Q/Theta(star, 1), an algebra generated by the
remaining generators.  Hence every n-generated SI algebra is either
2-element or B + {star} for a quotient B of F_{n-1}.  The operations of
B + {star} are fixed by B except where a tuple with a star collapses to 1;
those cells are star or 1, and each choice is tested for membership in the
variety by extending generators to a homomorphism from a free algebra.
"""
from __future__ import annotations

import itertools

import numpy as np

from .._kernels import is_hom_binary
from ..algebra import (FiniteAlgebra, congruence_lattice, isomorphic, quotient,
                       subdirectly_irreducible, subuniverse)
from ..errors import CapExceeded, PreconditionFailed

MAX_AMBIGUOUS = 12


def hom_labels(F, Q, images):
    """Values in Q of every element of F_n under x_i -> images[i-1], read
    along the representative terms (well defined only if a hom exists)."""
    cl = F.closure
    N = F.size
    h = np.empty(N, np.int64)
    for i in range(N):
        p = cl.prov[i]
        if p[0] == "var":
            h[i] = images[p[1] - 1]
        elif p[0] == "const":
            h[i] = int(Q.table(p[1]))
        else:
            h[i] = Q.table(p[1])[tuple(int(h[a]) for a in p[2])]
    return h


def extends_to_hom(F, Q, images):
    """Whether x_i -> images[i-1] extends to a homomorphism F_n -> Q.

    Returns (ok, labels).  Every basic operation is checked on all
    arguments through the tabulated operations of F_n, so this decides
    whether the generated subalgebra of Q lies in the variety.
    """
    h = hom_labels(F, Q, images)
    sig = F.context.signature
    for name, k in sig.operations:
        if k == 0:
            if h[F.constant_index(name)] != int(Q.table(name)):
                return False, h
        elif k == 1:
            if (h[F.op_table(name)] != Q.table(name)[h]).any():
                return False, h
        elif k == 2:
            ok, _, _ = is_hom_binary(F.op_table(name), h, np.asarray(Q.table(name), np.int64))
            if not ok:
                return False, h
        else:
            raise PreconditionFailed("operations of arity at most 2",
                                     f"{name} has arity {k}")
    return True, h


def one_point_extensions(B):
    """Every algebra on B + {star} (star = B.size) that collapses onto B."""
    s = B.size
    one = B.one
    sig = B.signature
    base = {}
    cells = []
    for name, k in sig.operations:
        if k == 0:
            base[name] = np.array(int(B.table(name)))
            continue
        tab = np.empty((s + 1,) * k, np.int64)
        for tup in itertools.product(range(s + 1), repeat=k):
            col = tuple(one if a == s else a for a in tup)
            v = int(B.table(name)[col])
            tab[tup] = v
            if s in tup and v == one:
                cells.append((name, tup))
        base[name] = tab
    if len(cells) > MAX_AMBIGUOUS:
        raise CapExceeded("ambiguous cells of a one-point extension", MAX_AMBIGUOUS)
    names = list(B.names or [str(i) for i in range(s)]) + ["*"]
    for bits in itertools.product((0, 1), repeat=len(cells)):
        tables = {name: tab.copy() for name, tab in base.items()}
        for (name, tup), b in zip(cells, bits):
            tables[name][tup] = s if b else one
        yield FiniteAlgebra(s + 1, one, tables, signature=sig, names=names)


def _generator_images(F, nat):
    return [int(nat[g]) for g in F.generator_elements]


def n_generated_si(V, n):
    """SI algebras of V generated by n elements, one per isomorphism type.

    Returns a list of (Q, star, labels): ``labels`` maps F_n onto Q.  Needs
    an equivalence term and the chi identities (checked here).
    """
    from .checks import check_variety_identities, two_element_members
    if V.equiv_term is None:
        raise PreconditionFailed("equivalence term", "one-point extensions need one")
    rep = check_variety_identities(V)
    if not rep["holds"]:
        raise PreconditionFailed("chi identities", "one-point extensions rely on them")
    F = V.free(n).build()
    out = []

    def add(Q, star, q):
        for P, _, _ in out:
            if isomorphic(P, Q):
                return
        ok, h = extends_to_hom(F, Q, q)
        if ok and len(set(h.tolist())) == Q.size:
            out.append((Q, star, h))

    for B in two_element_members(V):
        for q in itertools.product(range(2), repeat=n):
            if len(subuniverse(B, list(q))) == 2:
                add(B, 0, list(q))
                break
    if n == 0:
        return out
    P = V.free(n - 1).build()
    PA = P.algebra()
    bases = []
    for theta in congruence_lattice(PA, V.caps["max_congruences"], one_generated=True):
        if theta.num_blocks < 2:
            continue
        B, nat = quotient(PA, theta)
        if any(isomorphic(B, C) for C, _ in bases):
            continue
        bases.append((B, nat))
    pre = V.free(1).build()
    for B, nat in bases:
        gens = _generator_images(P, nat)
        star = B.size
        for Q in one_point_extensions(B):
            if not extends_to_hom(pre, Q, [star])[0]:
                continue
            info = subdirectly_irreducible(Q)
            if info is None or info.star != star:
                continue
            add(Q, star, [star] + gens)
    return out
