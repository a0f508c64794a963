"""Varieties presented as Var(K) for a finite list K of finite algebras."""
from __future__ import annotations

import hashlib
import json

import numpy as np

from ..algebra import assignment_columns, term_table
from ..errors import InvalidContext, NoDesignatedTerm
from ..terms import App, Var, format_term, max_var, parse_term, substitute
from .free import FreeAlgebra

DEFAULT_CAPS = {
    "max_free_size": 20000,
    "max_congruences": 5000,
    "max_hom_search": 10 ** 7,
    "max_synthesis_steps": 10 ** 4,
    # largest free algebra whose congruence lattice is built explicitly
    "max_explicit_lattice": 1000,
}


class VarietyContext:
    """Generators sharing one signature, plus the designated binary terms.

    Elements of F_n are handled as evaluation vectors: for each generator A
    (in order) the values on all of A^n in mixed-radix order.  Such a vector
    is exactly the tuple of term-function tables, so identities, substitution
    and endomorphisms reduce to table lookups.
    """

    def __init__(self, name, signature, generators, equiv_term=None,
                 subtractive_term=None, caps=None, validate=True, description=""):
        self.name = name
        self.signature = signature
        self.generators = list(generators)
        if not self.generators:
            raise InvalidContext("a context needs at least one generator")
        for A in self.generators:
            if A.signature is not signature:
                if sorted(A.signature.operations) != sorted(signature.operations):
                    raise InvalidContext("generators must share the signature")
                A.signature = signature
        if isinstance(equiv_term, str):
            equiv_term = parse_term(equiv_term, signature)
        if isinstance(subtractive_term, str):
            subtractive_term = parse_term(subtractive_term, signature)
        for t in (equiv_term, subtractive_term):
            if t is not None and max_var(t) > 2:
                raise InvalidContext("designated terms are binary")
        self.equiv_term = equiv_term
        self.subtractive_term = subtractive_term
        self.caps = dict(DEFAULT_CAPS)
        self.caps.update(caps or {})
        self.description = description
        self._free = {}
        self._vec_cache = {}
        self._spectrum = None
        self._views = {}
        self._cd = None
        self._cd_done = False
        self._bin_tabs = {}
        self._cache = {}
        self._basic = {}
        if validate:
            from .checks import validate_equivalence_term, validate_subtractive_term
            if equiv_term is not None:
                ok, wit = validate_equivalence_term(self)
                if not ok:
                    raise InvalidContext(f"equivalence term fails: {wit}")
            if subtractive_term is not None:
                ok, wit = validate_subtractive_term(self)
                if not ok:
                    raise InvalidContext(f"subtractive term fails: {wit}")

    def __repr__(self):
        return f"<VarietyContext {self.name}>"

    # ------------------------------------------------------------ identity
    def fingerprint(self):
        d = {"signature": self.signature.to_json(),
             "generators": [A.to_json() for A in self.generators],
             "equiv_term": format_term(self.equiv_term) if self.equiv_term else None,
             "subtractive_term": format_term(self.subtractive_term) if self.subtractive_term else None}
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]

    def parse(self, text):
        return parse_term(text, self.signature)

    def format(self, t, shorthand=False):
        return format_term(t, self.signature, shorthand=shorthand)

    def one(self):
        return App(self.signature.constant_one)

    def equiv(self, a, b):
        if self.equiv_term is None:
            raise NoDesignatedTerm("no equivalence term")
        sym = self.signature.equiv_symbol
        if sym is not None and self.equiv_term == App(sym, [Var(1), Var(2)]):
            return App(sym, [a, b])
        return substitute(self.equiv_term, {1: a, 2: b})

    def sub(self, a, b):
        if self.subtractive_term is None:
            raise NoDesignatedTerm("no subtractive term")
        sym = self.signature.subtractive_symbol
        if sym is not None and self.subtractive_term == App(sym, [Var(1), Var(2)]):
            return App(sym, [a, b])
        return substitute(self.subtractive_term, {1: a, 2: b})

    def chi(self, x, y):
        """x <-> y <-> y."""
        return self.equiv(self.equiv(x, y), y)

    # ------------------------------------------------------------- vectors
    def block_slices(self, n):
        out = []
        off = 0
        for A in self.generators:
            ln = A.size ** n
            out.append((A, off, off + ln))
            off += ln
        return out

    def vector_length(self, n):
        return sum(A.size ** n for A in self.generators)

    def vector(self, t, n=None):
        """Evaluation vector of ``t`` in the layout of F_n."""
        if n is None:
            n = max_var(t)
        key = (t, n)
        v = self._vec_cache.get(key)
        if v is None:
            parts = [term_table(t, A, n) for A in self.generators]
            v = np.concatenate(parts).astype(np.uint8)
            v.setflags(write=False)
            if len(self._vec_cache) > 50000:
                self._vec_cache.clear()
            self._vec_cache[key] = v
        return v

    def one_vec(self, n):
        v = self._basic.get(("one", n))
        if v is None:
            v = np.concatenate([np.full(A.size ** n, A.one, np.uint8) for A in self.generators])
            v.setflags(write=False)
            self._basic[("one", n)] = v
        return v

    def var_vec(self, i, n):
        v = self._basic.get((i, n))
        if v is None:
            v = np.concatenate([assignment_columns(A.size, n)[i - 1].astype(np.uint8)
                                for A in self.generators])
            v.setflags(write=False)
            self._basic[(i, n)] = v
        return v

    def var_vecs(self, n):
        return [self.var_vec(i, n) for i in range(1, n + 1)]

    def _binary_tables(self, which):
        tabs = self._bin_tabs.get(which)
        if tabs is None:
            t = self.equiv_term if which == "equiv" else self.subtractive_term
            if t is None:
                raise NoDesignatedTerm(f"no {which} term")
            tabs = [term_table(t, A, 2).reshape(A.size, A.size) for A in self.generators]
            self._bin_tabs[which] = tabs
        return tabs

    def binop_vec(self, which, u, v, n):
        out = np.empty_like(u)
        for tab, (A, lo, hi) in zip(self._binary_tables(which), self.block_slices(n)):
            out[lo:hi] = tab[u[lo:hi], v[lo:hi]]
        return out

    def equiv_vec(self, u, v, n):
        return self.binop_vec("equiv", u, v, n)

    def sub_vec(self, u, v, n):
        return self.binop_vec("sub", u, v, n)

    def op_vec(self, name, args, n):
        """Apply a signature operation coordinatewise to vectors of F_n."""
        k = self.signature.arity(name)
        if k == 0:
            return np.concatenate([np.full(A.size ** n, int(A.table(name)), np.uint8)
                                   for A in self.generators])
        out = np.empty(self.vector_length(n), np.uint8)
        for A, lo, hi in self.block_slices(n):
            out[lo:hi] = A.table(name)[tuple(a[lo:hi] for a in args)]
        return out

    def gather_index(self, images, n_src, n_tgt):
        """Positions p with sigma(u)[j] = u[p[j]] for the homomorphism
        F_{n_src} -> F_{n_tgt} sending x_i to images[i-1] (vectors)."""
        idx = np.empty(self.vector_length(n_tgt), np.int64)
        src = self.block_slices(n_src)
        for (A, lo, hi), (_, slo, _) in zip(self.block_slices(n_tgt), src):
            m = A.size
            part = np.full(hi - lo, slo, np.int64)
            for i, img in enumerate(images):
                part += img[lo:hi].astype(np.int64) * m ** (n_src - 1 - i)
            idx[lo:hi] = part
        return idx

    def apply(self, u, images, n_src, n_tgt):
        """sigma(u) for the homomorphism F_{n_src} -> F_{n_tgt} with
        x_i -> images[i-1]; all arguments are vectors."""
        return np.asarray(u)[self.gather_index(images, n_src, n_tgt)]

    def coordinate(self, pos, n):
        """(generator index, assignment tuple) of a vector position."""
        for g, (A, lo, hi) in enumerate(self.block_slices(n)):
            if lo <= pos < hi:
                r = pos - lo
                digits = []
                for i in range(n):
                    digits.append((r // A.size ** (n - 1 - i)) % A.size)
                return g, tuple(digits)
        raise IndexError(pos)

    def describe_coordinate(self, pos, n):
        g, ass = self.coordinate(pos, n)
        A = self.generators[g]
        return {"algebra": A.label or f"generator {g}",
                "assignment": {f"x{i + 1}": A.name_of(a) for i, a in enumerate(ass)}}

    # -------------------------------------------------------- free algebras
    def free(self, n):
        F = self._free.get(n)
        if F is None:
            F = FreeAlgebra(self, n)
            self._free[n] = F
        return F

    def spectrum(self):
        if self._spectrum is None:
            from .spectrum import si_spectrum
            self._spectrum = si_spectrum(self)
        return self._spectrum

    def distributivity_witness(self):
        """A majority or Pixley term if one is found (certifies congruence
        distributivity, so Jonsson's lemma applies); None otherwise."""
        if not self._cd_done:
            from .checks import search_term_conditions, MAJORITY, PIXLEY
            from ..errors import CapExceeded
            try:
                c, t = search_term_conditions(self, 3, [MAJORITY, PIXLEY])
            except CapExceeded:
                c, t = None, None
            self._cd = None if t is None else (("majority", "pixley")[c], t)
            self._cd_done = True
        return self._cd

    def si_view(self, n, method="auto"):
        key = (n, method)
        view = self._views.get(key)
        if view is None:
            from .spectrum import si_view
            view = si_view(self, n, method)
            self._views[key] = view
        return view


def binary_table(t, A):
    return term_table(t, A, 2).reshape(A.size, A.size)
