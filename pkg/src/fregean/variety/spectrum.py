"""Subdirectly irreducible members and the meet-irreducible filters of F_n.

Every completely meet-irreducible filter eta of F_n is the kernel of an onto
map F_n -> Q with Q subdirectly irreducible; it is recorded as the pair
(Q, q) where q lists the images of x1..xn.  Two providers build this list:

* ``spectrum``: Q ranges over the known SI members up to isomorphism and q
  over generating tuples modulo Aut(Q).  The known members are the SI
  quotients of subalgebras of the generators, plus SI quotients of smaller
  free algebras found along the way.  The list is complete whenever the
  variety is congruence distributive (every SI member of Var(K) then lies
  in HS(K)); completeness is certified by a majority or Pixley term.
* ``explicit``: build F_n, its congruence lattice and its meet-irreducibles,
  and identify each quotient with a known member (recording new ones).

Both produce the same ordered list when the spectrum is complete.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..algebra import (FiniteAlgebra, all_homomorphisms, automorphisms, congruence_lattice,
                       isomorphic, one_generated_meet_irreducibles, quotient, subalgebra, subalgebras, subuniverse)
from ..errors import CapExceeded


@dataclass
class SpectrumMember:
    """An SI algebra of the variety with a way to evaluate elements of F_n in it.

    Members coming from a generator carry ``proj``/``lift`` between the
    generator and Q.  Members found as quotients F_k/theta (``generator`` is
    -1) carry ``source_n = k``, ``source_labels`` (F_k index -> Q element)
    and ``lift`` as F_k indices.
    """
    algebra: FiniteAlgebra
    generator: int
    universe: tuple
    proj: np.ndarray
    lift: np.ndarray
    star: int | None
    automorphisms: list = field(default_factory=list)
    source_n: int | None = None
    source_labels: np.ndarray | None = None

    @property
    def size(self):
        return self.algebra.size


def si_spectrum(V):
    """SI members of HS(K), one per isomorphism type, smallest first."""
    members = []
    for g, A in enumerate(V.generators):
        for U in subalgebras(A):
            if len(U) < 2:
                continue
            S, emb = subalgebra(A, U)
            lat = congruence_lattice(S, V.caps["max_congruences"])
            for theta, plus in lat.meet_irreducibles():
                Q, nat = quotient(S, theta)
                if any(isomorphic(Q, M.algebra) for M in members):
                    continue
                proj = np.full(A.size, -1, np.int64)
                lift = np.full(Q.size, -1, np.int64)
                for i, a in enumerate(emb):
                    proj[a] = nat[i]
                    if lift[nat[i]] < 0:
                        lift[nat[i]] = a
                star = _star_from_cover(S, theta, plus, nat)
                if Q.names is None or any("/" in nm for nm in Q.names):
                    Q.names = [A.name_of(int(lift[q])) for q in range(Q.size)]
                Q.label = f"{A.label or 'G%d' % g}:{'/'.join(Q.names)}" if Q.size <= 8 else None
                auts = [h.map for h in automorphisms(Q)]
                members.append(SpectrumMember(Q, g, tuple(emb), proj, lift, star, auts))
    order = sorted(range(len(members)), key=lambda i: (members[i].size, i))
    return [members[i] for i in order]


def _star_from_cover(S, theta, plus, nat):
    one_lab = theta.labels[S.one]
    for x in range(S.size):
        if plus.labels[x] == plus.labels[S.one] and theta.labels[x] != one_lab:
            return int(nat[x])
    return None


def canonical_tuple(q, auts):
    best = tuple(q)
    for a in auts:
        cand = tuple(a[v] for v in q)
        if cand < best:
            best = cand
    return best


def generates(Q, q):
    return len(subuniverse(Q, list(q))) == Q.size


class SIView:
    """The completely meet-irreducible filters of F_n as an ordered list.

    Entry e describes eta_e: ``member[e]`` indexes the spectrum (the
    quotient F_n/eta_e is isomorphic to that member), ``gens[e]`` are the
    images of x1..xn, ``star[e]``/``one[e]`` the distinguished elements of
    the quotient, and ``qsize[e]`` its size.  ``eval(vec)`` maps an element
    of F_n to its class in every quotient.

    ``exact`` says the list is all of Fm(F_n).  ``star_separating`` records
    the weaker property that every element other than 1 is the star of some
    listed quotient (None when unchecked); the synthesis loops only rely on
    that property.
    """

    def __init__(self, V, n, kind, member, gens, exact, basis):
        self.V = V
        self.n = n
        self.kind = kind
        self.exact = exact
        self.basis = basis
        self.star_separating = True if exact else None
        spec = V.spectrum()
        self.member = np.asarray(member, np.int64)
        self.gens = np.asarray(gens, np.int64).reshape(len(member), n)
        self.qsize = np.array([spec[m].size for m in self.member], np.int64)
        self.star = np.array([spec[m].star if spec[m].star is not None else -1
                              for m in self.member], np.int64)
        self.one = np.array([spec[m].algebra.one for m in self.member], np.int64)
        self._prepare_gather()

    def __len__(self):
        return len(self.member)

    def _prepare_gather(self):
        V, n = self.V, self.n
        spec = V.spectrum()
        slices = V.block_slices(n)
        E = len(self.member)
        idx = np.zeros(E, np.int64)
        projoff = np.zeros(E, np.int64)
        projs, offs, off = [], {}, 0
        for m, M in enumerate(spec):
            offs[m] = off
            projs.append(M.proj)
            off += len(M.proj)
        self._projcat = np.concatenate(projs) if projs else np.zeros(0, np.int64)
        # entries in quotients of smaller free algebras, grouped by k
        groups = {}
        self._direct = np.ones(E, bool)
        for e, m in enumerate(self.member):
            M = spec[m]
            if M.generator < 0:
                self._direct[e] = False
                groups.setdefault(M.source_n, []).append(e)
                continue
            A, lo, _ = slices[M.generator]
            pos = 0
            for i in range(n):
                pos += int(M.lift[self.gens[e, i]]) * A.size ** (n - 1 - i)
            idx[e] = lo + pos
            projoff[e] = offs[m]
        self._idx = idx
        self._projoff = projoff
        self._groups = []
        for k, entries in sorted(groups.items()):
            F = V.free(k)
            rows, labs, laboff, off = [], [], [], 0
            seen = {}
            for e in entries:
                m = int(self.member[e])
                M = spec[m]
                images = [F.vector(int(M.lift[v])) for v in self.gens[e]]
                rows.append(V.gather_index(images, n, k))
                if m not in seen:
                    seen[m] = off
                    labs.append(M.source_labels)
                    off += len(M.source_labels)
                laboff.append(seen[m])
            self._groups.append((F, np.array(entries, np.int64), np.stack(rows),
                                 np.concatenate(labs), np.array(laboff, np.int64)))

    def quotient_algebra(self, e):
        return self.V.spectrum()[self.member[e]].algebra

    def eval(self, vec):
        """Class of the F_n element ``vec`` in each quotient."""
        return self.eval_many(np.asarray(vec)[None, :])[0]

    def eval_many(self, vecs):
        vecs = np.asarray(vecs)
        out = np.zeros((len(vecs), len(self.member)), np.int64)
        if self._direct.any():
            vals = vecs[:, self._idx].astype(np.int64)
            out[:, self._direct] = self._projcat[self._projoff[None, :] + vals][:, self._direct]
        for F, entries, rows, labs, laboff in self._groups:
            sub = vecs[:, rows]                           # vectors x entries x L_k
            j = F.closure.lookup_many(sub.reshape(-1, sub.shape[-1]))
            j = j.reshape(len(vecs), len(entries))
            if (j < 0).any():
                raise ValueError("image outside the enumerated free algebra")
            out[:, entries] = labs[laboff[None, :] + j]
        return out

    def contains(self, vec):
        """Boolean mask: which eta contain the element (value is 1)."""
        return self.eval(vec) == self.one

    def is_star(self, vec):
        return self.eval(vec) == self.star

    def check_star_separation(self, vecs, one):
        """Whether every listed element other than ``one`` is some quotient's star."""
        for s in range(0, len(vecs), 2048):
            block = np.asarray(vecs[s:s + 2048])
            hit = (self.eval_many(block) == self.star[None, :]).any(axis=1)
            trivial = (block == one[None, :]).all(axis=1)
            if not (hit | trivial).all():
                return False
        return True

    def describe(self, e):
        spec = self.V.spectrum()
        M = spec[self.member[e]]
        Q = M.algebra
        return {"id": int(e), "quotient_size": int(Q.size),
                "quotient": Q.label or f"member {int(self.member[e])}",
                "images": [Q.name_of(int(v)) for v in self.gens[e]]}


def _spectrum_entries(V, n):
    spec = V.spectrum()
    member, gens = [], []
    for m, M in enumerate(spec):
        Q = M.algebra
        for q in itertools.product(range(Q.size), repeat=n):
            if canonical_tuple(q, M.automorphisms) != q:
                continue
            if not generates(Q, q):
                continue
            member.append(m)
            gens.append(q)
    return member, gens


def _match_member(spec, Q, q):
    for m, M in enumerate(spec):
        if M.size != Q.size:
            continue
        for h in all_homomorphisms(Q, M.algebra):
            if len(set(h.map)) == Q.size:
                # compose with the automorphism that makes the images canonical
                best = None
                for a in M.automorphisms:
                    comp = tuple(a[v] for v in h.map)
                    cand = tuple(comp[v] for v in q)
                    if best is None or cand < best[0]:
                        best = (cand, comp)
                return m, best[0], best[1]
    return None


def spectrum_view(V, n, exact, basis):
    member, gens = _spectrum_entries(V, n)
    return SIView(V, n, "spectrum", member, gens, exact, basis)


class ExplicitSIView(SIView):
    """Meet-irreducibles of F_n computed from its congruence lattice."""

    def __init__(self, V, n, one_generated=True):
        F = V.free(n).build()
        FA = F.algebra()
        cap = V.caps["max_congruences"]
        if one_generated:
            pairs, count = one_generated_meet_irreducibles(FA, cap)
        else:
            lat = congruence_lattice(FA, cap)
            pairs, count = lat.meet_irreducibles(), len(lat)
        spec = V.spectrum()
        entries = []
        unmatched = []
        for theta, plus in pairs:
            Q, nat = quotient(FA, theta)
            nat = np.asarray(nat)
            q = [int(nat[g]) for g in F.generator_elements]
            match = _match_member(spec, Q, q)
            if match is None:
                # an SI quotient outside the known members: record it
                star = None
                for x in range(FA.size):
                    if plus.labels[x] == plus.labels[FA.one] and theta.labels[x] != theta.labels[FA.one]:
                        star = int(nat[x])
                        break
                lift = np.array([int(np.nonzero(nat == c)[0][0]) for c in range(Q.size)], np.int64)
                Q.names = [FA.name_of(int(j)) for j in lift]
                Q.label = f"F_{n}/{len(spec)}"
                if Q.size <= 8:
                    Q.label += ":" + "/".join(Q.names)
                spec.append(SpectrumMember(Q, -1, (), np.zeros(0, np.int64), lift, star,
                                           [h.map for h in automorphisms(Q)],
                                           source_n=n, source_labels=nat.astype(np.int64)))
                unmatched.append(len(spec) - 1)
                match = _match_member(spec, Q, q)
            m, qq, hmap = match
            entries.append((m, qq, np.asarray(hmap)[nat]))
        entries.sort(key=lambda e: (e[0], e[1]))
        self.unmatched = unmatched
        self.F = F
        self.num_congruences = count
        self._labels = np.array([e[2] for e in entries], np.int64).reshape(len(entries), FA.size)
        super().__init__(V, n, "explicit", [e[0] for e in entries], [e[1] for e in entries],
                         exact=True, basis="explicit congruence lattice of F_%d" % n)

    def _prepare_gather(self):
        pass

    def eval_many(self, vecs):
        j = self.F.closure.lookup_many(np.asarray(vecs))
        if (j < 0).any():
            raise ValueError("vector is not an element of F_n")
        return self._labels[:, j].T


class ExtensionSIView(SIView):
    """Fm(F_n) from the n-generated SI algebras found by one-point extension.

    Exact in contexts with an equivalence term satisfying the chi
    identities; entries are the generating n-tuples of each algebra up to
    its automorphisms.  Known spectrum members are reused, the others are
    registered as quotients of F_n.
    """

    def __init__(self, V, n):
        from .extensions import n_generated_si
        spec = V.spectrum()
        found = []
        for Q, star, labels in n_generated_si(V, n):
            match = _match_member(spec, Q, [0] * 0)
            if match is None:
                lift = np.array([int(np.nonzero(labels == c)[0][0]) for c in range(Q.size)],
                                np.int64)
                F = V.free(n)
                Q.names = [F._short(int(j)) for j in lift]
                Q.label = f"F_{n}/{len(spec)}"
                if Q.size <= 8:
                    Q.label += ":" + "/".join(Q.names)
                spec.append(SpectrumMember(Q, -1, (), np.zeros(0, np.int64), lift, star,
                                           [h.map for h in automorphisms(Q)],
                                           source_n=n, source_labels=labels.astype(np.int64)))
                found.append(len(spec) - 1)
            else:
                found.append(match[0])
        member, gens = [], []
        for m in sorted(set(found)):
            M = spec[m]
            for q in itertools.product(range(M.size), repeat=n):
                if canonical_tuple(q, M.automorphisms) == q and generates(M.algebra, q):
                    member.append(m)
                    gens.append(q)
        # every n-generated member of the spectrum must have been found
        for m, M in enumerate(spec):
            if m in found:
                continue
            if any(generates(M.algebra, q) for q in itertools.product(range(M.size), repeat=n)):
                raise RuntimeError(f"SI member {M.algebra.label} is {n}-generated but was not "
                                   "obtained by one-point extension")
        self.F = V.free(n)
        super().__init__(V, n, "extension", member, gens, exact=True,
                         basis="one-point extensions of quotients of F_%d" % max(n - 1, 0))


def _fits(F, limit):
    try:
        return not F.closure.ensure(limit + 1)
    except CapExceeded:
        return False


def _extension_applies(V):
    from .checks import check_variety_identities
    if V.equiv_term is None:
        return False
    if any(k > 2 for _, k in V.signature.operations):
        return False
    return check_variety_identities(V)["holds"]


def si_view(V, n, method="auto"):
    """Fm(F_n) by the requested provider.

    ``auto`` uses the spectrum when a majority or Pixley term certifies it,
    one-point extensions when the chi identities hold and F_n can be
    enumerated, the explicit lattice when F_n is small, and otherwise the spectrum
    enlarged by SI quotients of the smaller free algebras, with star
    separation checked on F_n when F_n can be enumerated.
    """
    if method == "explicit":
        return ExplicitSIView(V, n)
    if method == "extension":
        return ExtensionSIView(V, n)
    if method not in ("auto", "spectrum"):
        raise ValueError(f"unknown method {method!r}")
    cd = V.distributivity_witness()
    if cd is not None:
        return spectrum_view(V, n, exact=True, basis=f"SI members of HS(K); {cd[0]} term")
    if method == "spectrum":
        return spectrum_view(V, n, exact=False, basis="SI members of HS(K); completeness assumed")
    if _extension_applies(V):
        try:
            V.free(n).build()
            return ExtensionSIView(V, n)
        except CapExceeded:
            pass
    if _fits(V.free(n), V.caps["max_explicit_lattice"]):
        return ExplicitSIView(V, n)
    found = []
    for k in range(n):
        if _fits(V.free(k), V.caps["max_explicit_lattice"]):
            V.si_view(k, "explicit")
            found.append(k)
    basis = "SI members of HS(K)"
    if found:
        basis += " and of F_" + ",".join(map(str, found))
    view = spectrum_view(V, n, exact=False, basis=basis)
    F = V.free(n)
    try:
        F.build()
    except CapExceeded:
        view.basis += "; star separation unchecked"
        return view
    view.star_separating = view.check_star_separation(F.vectors, V.one_vec(n))
    view.basis += "; star separation on F_%d %s" % (n, "verified" if view.star_separating
                                                     else "fails")
    return view
