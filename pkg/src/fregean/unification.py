"""Unifiability, brute-force unifiers, certificates and their verification.

All problems are matching problems ``t = 1`` over x1..xn.  Elements of F_n
are evaluation vectors (see :class:`~fregean.variety.VarietyContext`), so a
substitution is a tuple of vectors and applying it is a gather.
"""
from __future__ import annotations

import itertools
import json

import numpy as np

from .algebra import assignment_columns, eval_on_columns, evaluate, subuniverse
from .errors import CapExceeded, NoDesignatedTerm, NotUnifiable
from .terms import Var, format_term, max_var, parse_term, substitute
from . import _kernels as K

KINDS = ("plain", "projective")
PROVENANCES = ("brute_force", "synthesis_cp", "synthesis_subtractive", "height_induction",
               "system")


class UnifierCertificate:
    """A substitution tau for the matching problems ``terms`` (each p = 1).

    ``tau[i]`` is the image of x_{i+1}.  Single-term problems are the usual
    case; ``solve_system`` produces certificates for several terms at once.
    """

    def __init__(self, terms, tau, kind="plain", provenance="brute_force", n=None,
                 verified=None, notes=None):
        if not isinstance(terms, (list, tuple)):
            terms = [terms]
        if kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        self.terms = list(terms)
        self.n = n if n is not None else max([max_var(t) for t in self.terms] + [0])
        self.tau = list(tau)
        if len(self.tau) != self.n:
            raise ValueError(f"tau has {len(self.tau)} images for {self.n} variables")
        self.kind = kind
        self.provenance = provenance
        self.verified = verified
        self.notes = dict(notes or {})

    @property
    def term(self):
        return self.terms[0]

    def substitution(self):
        return {i + 1: u for i, u in enumerate(self.tau)}

    def to_json(self, sig=None):
        d = {"term": format_term(self.term, sig) if len(self.terms) == 1 else None,
             "tau": [format_term(u, sig) for u in self.tau],
             "kind": self.kind, "provenance": self.provenance, "verified": self.verified,
             "n": self.n}
        if len(self.terms) != 1:
            d["terms"] = [format_term(t, sig) for t in self.terms]
        if self.notes:
            d["notes"] = self.notes
        return d

    def dumps(self, sig=None):
        return json.dumps(self.to_json(sig), ensure_ascii=False)

    @classmethod
    def from_json(cls, data, sig):
        if isinstance(data, (str, bytes)):
            data = json.loads(data)
        texts = data.get("terms") or [data["term"]]
        terms = [parse_term(s, sig) for s in texts]
        tau = [parse_term(s, sig) for s in data["tau"]]
        return cls(terms, tau, kind=data.get("kind", "plain"),
                   provenance=data.get("provenance", "brute_force"),
                   n=data.get("n", len(tau)), verified=data.get("verified"),
                   notes=data.get("notes"))

    def __repr__(self):
        return f"<UnifierCertificate {self.kind} {self.provenance} n={self.n}>"


# ------------------------------------------------------------------ helpers

def cached(V, key, fn):
    """Per-context memo for checks that only depend on the context."""
    if key not in V._cache:
        V._cache[key] = fn()
    return V._cache[key]


def _arity(t, n):
    return max_var(t) if n is None else n


def tau_vectors(V, tau, n):
    return [V.vector(u, n) for u in tau]


def apply_tau(V, u, tau_vecs, n):
    """Vector of sigma(u) where sigma sends x_i to tau_vecs[i-1] (all in F_n)."""
    return V.apply(u, tau_vecs, n, n)


def compose_vectors(V, outer, inner, n):
    """Images of x_i under outer o inner (inner applied first)."""
    return [V.apply(u, outer, n, n) for u in inner]


def is_one(V, vec, n):
    return bool((np.asarray(vec) == V.one_vec(n)).all())


def element_term(V, vec, n, fallback=None):
    """A short term for a vector: the representative term when the vector
    is among the elements enumerated so far, else ``fallback``."""
    F = V.free(n)
    idx = F.closure.lookup_many(np.asarray(vec, np.uint8)[None, :])[0]
    if idx >= 0:
        return F.rep_term(int(idx))
    return fallback


class FilterOracle:
    """Principal filters of F_n through its completely meet-irreducible filters.

    Every filter is the intersection of the meet-irreducibles above it, so
    c lies in [t) exactly when every listed eta containing t contains c.
    This is exact when the view lists all of Fm(F_n) (``exact``).
    """

    def __init__(self, V, n, method="auto"):
        self.V = V
        self.n = n
        self.view = V.si_view(n, method)
        self.exact = bool(self.view.exact)

    def above(self, vec):
        """Mask of the meet-irreducibles containing the element."""
        return self.view.eval(vec) == self.view.one

    def above_many(self, vecs):
        return self.view.eval_many(vecs) == self.view.one[None, :]

    def contains(self, t_vec, c_vec):
        """Whether c lies in the principal filter [t)."""
        zt = self.above(t_vec)
        return bool((self.above(c_vec) | ~zt).all())

    def contains_many(self, t_vec, c_vecs):
        zt = self.above(t_vec)
        return (self.above_many(c_vecs) | ~zt[None, :]).all(axis=1)

    def height(self, t_vec):
        """Number of meet-irreducibles containing t; grows as [t) shrinks."""
        return int(self.above(t_vec).sum())


# ---------------------------------------------------------------- reduction

def reduce_to_matching(V, equations, prefer="cp"):
    """Matching problems whose principal filters join to the congruence of
    the system: s <-> t in the congruence permutable case, otherwise the
    pair s(a, b), s(b, a) for the subtractive term."""
    out = []
    use_cp = V.equiv_term is not None and (prefer == "cp" or V.subtractive_term is None)
    if not use_cp and V.subtractive_term is None:
        raise NoDesignatedTerm("neither an equivalence nor a subtractive term is set")
    for a, b in equations:
        if isinstance(a, str):
            a = V.parse(a)
        if isinstance(b, str):
            b = V.parse(b)
        if use_cp:
            out.append(V.equiv(a, b))
        else:
            out.append(V.sub(a, b))
            out.append(V.sub(b, a))
    return out


# ------------------------------------------------------------ unifiability

def ground_unifiable(V, t, n=None):
    """An assignment of closed-term values to x1..xn making t equal to 1.

    Any unifier followed by the map sending every generator to 1 is such an
    assignment, so its existence decides unifiability.  ``t`` may also be a
    list of terms, all to be made 1.  Returns a dict with ``indices``
    (elements of F_0), ``terms`` and ``vectors`` (lifted to F_n), or None.
    """
    ts = list(t) if isinstance(t, (list, tuple)) else [t]
    n = max([max_var(u) for u in ts] + [0]) if n is None else n
    F0 = V.free(0).build()
    m = F0.size
    if m ** n > V.caps["max_hom_search"]:
        raise CapExceeded("ground assignments", V.caps["max_hom_search"])
    tvs = [V.vector(u, n) for u in ts]
    one0 = V.one_vec(0)
    vecs0 = F0.vectors
    for combo in itertools.product(range(m), repeat=n):
        imgs = [vecs0[j] for j in combo]
        if all((V.apply(tv, imgs, n, 0) == one0).all() for tv in tvs):
            terms = [F0.rep_term(j) for j in combo]
            return {"indices": list(combo), "terms": terms,
                    "vectors": [V.apply(vecs0[j], [], 0, n) for j in combo]}
    return None


def check_unif_conditions(V, t, n=None, method="auto"):
    """The two finite conditions equivalent to unifiability under (*).

    cond3: every 2-element member of the variety has a tuple where t is 1.
    cond4: the principal filter [t) of F_n meets the closed-term values only
    in 1.  ``informational`` is set when the chi identities fail, in which
    case the conditions need not characterize unifiability.
    """
    from .variety.checks import check_variety_identities, two_element_members
    n = _arity(t, n)
    report = {"cond3": True, "cond4": True, "witnesses": {"cond3": {}, "cond4": None}}
    for B in cached(V, "two_element_members", lambda: two_element_members(V)):
        label = B.label or "2-element"
        hit = None
        for q in itertools.product(range(2), repeat=n):
            if evaluate(t, B, list(q)) == B.one:
                hit = {f"x{i + 1}": B.name_of(a) for i, a in enumerate(q)}
                break
        report["witnesses"]["cond3"][label] = hit
        if hit is None:
            report["cond3"] = False
    oracle = FilterOracle(V, n, method)
    tv = V.vector(t, n)
    F0 = V.free(0).build()
    consts = [V.apply(F0.vectors[j], [], 0, n) for j in range(F0.size)]
    one = V.one_vec(n)
    for j, c in enumerate(consts):
        if (c == one).all():
            continue
        if oracle.contains(tv, c):
            report["cond4"] = False
            report["witnesses"]["cond4"] = {"constant": format_term(F0.rep_term(j), V.signature)}
            break
    report["filter_exact"] = oracle.exact
    try:
        report["informational"] = (V.equiv_term is None or not cached(
            V, "variety_identities", lambda: check_variety_identities(V))["holds"])
    except NoDesignatedTerm:
        report["informational"] = True
    return report


# -------------------------------------------------------------- brute force

def _tuples(size, n):
    """All n-tuples over range(size) as rows, in mixed-radix order."""
    return np.ascontiguousarray(assignment_columns(size, n).T)


class _CoordinateRelation:
    """Per-coordinate admissible value tuples for an n-tuple of F_m elements.

    ``rel[c, code]`` holds for tuples (b1..bn) of the coordinate's algebra
    (code in base S, the largest generator size) that are admissible;
    ``ext[j][c, code]`` marks prefixes of length j with an admissible
    completion.
    """

    def __init__(self, V, m, n, admissible):
        self.S = max(A.size for A in V.generators)
        S = self.S
        L = V.vector_length(m)
        rel = np.zeros((L, S ** n), bool)
        for A, lo, hi in V.block_slices(m):
            tuples = _tuples(A.size, n)
            codes = np.zeros(len(tuples), np.int64)
            for i in range(n):
                codes = codes * S + tuples[:, i]
            ok = admissible(A, lo, hi, tuples)          # (hi-lo) x len(tuples)
            rel[lo:hi, codes] = ok
        self.rel = rel
        ext = [None] * (n + 1)
        ext[n] = rel
        for j in range(n - 1, -1, -1):
            ext[j] = ext[j + 1].reshape(L, S ** j, S).any(axis=2)
        self.ext = ext
        self.L = L
        self.n = n

    def candidates(self, j, prefix_codes, vecs):
        """Rows of ``vecs`` admissible as component j+1 after the prefix."""
        tab = self.ext[j + 1]
        idx = prefix_codes[None, :] * self.S + vecs.astype(np.int64)
        return np.nonzero(tab[np.arange(self.L)[None, :], idx].all(axis=1))[0]


def _unifier_relation(V, t, n, projective):
    def admissible(A, lo, hi, tuples):
        vals = eval_on_columns(t, A, tuples.T)
        good = np.asarray(vals) == A.one
        ok = np.repeat(good[None, :], hi - lo, axis=0)
        if projective:
            # at coordinates where t is 1 a projective unifier fixes the assignment
            coords = _tuples(A.size, n)
            tc = np.asarray(eval_on_columns(t, A, coords.T)) == A.one
            for r in np.nonzero(tc)[0]:
                ok[r] &= (tuples == coords[r][None, :]).all(axis=1)
        return ok
    return _CoordinateRelation(V, n, n, admissible)


def _ext_stack(rel):
    width = rel.S ** rel.n
    out = np.zeros((rel.n + 1, rel.L, width), bool)
    for j, e in enumerate(rel.ext):
        out[j, :, :e.shape[1]] = e
    return out


def _search(V, t, n, projective, accept=None, cap=None):
    """Lexicographically first admissible tuple of F_n elements.

    Elements are taken in enumeration order.  The search runs over the first
    16, 64, 256, ... elements and returns the first hit of the first bound
    that has one, so it only enumerates as much of F_n as needed.
    """
    cap = V.caps["max_hom_search"] if cap is None else cap
    F = V.free(n)
    rel = _unifier_relation(V, t, n, projective)
    ext = _ext_stack(rel)
    bad = np.zeros((rel.L, rel.S ** n), bool)
    bound = 16
    while True:
        F.closure.ensure(bound)
        known = F.closure.N
        vecs = np.ascontiguousarray(F.closure.vecs[:known])
        start = np.full(n, -1, np.int64)
        while True:
            status, tup, _, _ = K.tuple_search(vecs, n, rel.S, ext, bad, cap, True, start)
            if status < 0:
                raise CapExceeded("unifier search nodes", cap)
            if status == 0:
                break
            tup = tuple(int(i) for i in tup)
            if accept is None or accept(tup):
                return tup, F
            start = np.array(tup, np.int64)
        if F.closure.complete:
            return None, F
        bound *= 4


def brute_force_unifier(V, t, n=None):
    """First endomorphism of F_n (by the search order of ``_search``) that
    sends t to 1, as a plain certificate; None if t is not unifiable."""
    n = _arity(t, n)
    if ground_unifiable(V, t, n) is None:
        return None
    if n == 0:
        return UnifierCertificate([t], [], "plain", "brute_force", n=0)
    tup, F = _search(V, t, n, projective=False)
    if tup is None:
        return None
    return UnifierCertificate([t], [F.rep_term(i) for i in tup], "plain", "brute_force", n=n)


def brute_force_projective_unifier(V, t, n=None, method="auto"):
    """First endomorphism tau of F_n with tau(t) = 1 and tau(x_i) congruent
    to x_i modulo Theta(t, 1); None when none exists."""
    n = _arity(t, n)
    if ground_unifiable(V, t, n) is None:
        return None
    if n == 0:
        return UnifierCertificate([t], [], "projective", "brute_force", n=0)
    oracle = FilterOracle(V, n, method)
    tv = V.vector(t, n)
    xs = V.var_vecs(n)
    F = V.free(n)

    def accept(tup):
        diffs = [V.equiv_vec(F.vector(i), x, n) if V.equiv_term is not None else None
                 for i, x in zip(tup, xs)]
        if diffs[0] is None:
            return _subtractive_congruent(V, oracle, tv, [F.vector(i) for i in tup], xs, n)
        return bool(oracle.contains_many(tv, np.stack(diffs)).all())

    tup, F = _search(V, t, n, projective=True, accept=accept)
    if tup is None:
        return None
    return UnifierCertificate([t], [F.rep_term(i) for i in tup], "projective", "brute_force",
                              n=n, notes={"filter_exact": oracle.exact})


def _subtractive_congruent(V, oracle, tv, images, xs, n):
    # a = b modulo Theta(t,1) iff s(a,b) and s(b,a) lie in [t)
    cs = []
    for u, x in zip(images, xs):
        cs.append(V.sub_vec(u, x, n))
        cs.append(V.sub_vec(x, u, n))
    return bool(oracle.contains_many(tv, np.stack(cs)).all())


def is_projective(V, t, tau, n=None, method="auto"):
    """Whether tau(t) = 1 and tau(x_i) = x_i modulo Theta(t, 1), computed in F_n."""
    n = _arity(t, n)
    tv = V.vector(t, n)
    imgs = tau_vectors(V, tau, n)
    if not is_one(V, apply_tau(V, tv, imgs, n), n):
        return False
    if n == 0:
        return True
    oracle = FilterOracle(V, n, method)
    xs = V.var_vecs(n)
    if V.equiv_term is not None:
        diffs = np.stack([V.equiv_vec(u, x, n) for u, x in zip(imgs, xs)])
        return bool(oracle.contains_many(tv, diffs).all())
    return _subtractive_congruent(V, oracle, tv, imgs, xs, n)


# -------------------------------------------------------------- verification

def verify_certificate(V, cert):
    """Check a certificate by two validity queries over the generators.

    First tau(p) = 1 for every problem term p.  For projective certificates
    also the quasi-identity (all p = 1) => tau(x_i) = x_i, evaluated at every
    generator assignment where all p are 1.  Returns (ok, report).
    """
    n = cert.n
    imgs = tau_vectors(V, cert.tau, n)
    report = {"unifies": True, "quasi_identity": None, "failures": []}
    pvecs = [V.vector(p, n) for p in cert.terms]
    one = V.one_vec(n)
    for p, pv in zip(cert.terms, pvecs):
        img = apply_tau(V, pv, imgs, n)
        bad = np.nonzero(img != one)[0]
        if len(bad):
            report["unifies"] = False
            wit = V.describe_coordinate(int(bad[0]), n)
            wit["query"] = "tau(p) = 1"
            wit["term"] = format_term(p, V.signature)
            report["failures"].append(wit)
    if cert.kind == "projective":
        report["quasi_identity"] = True
        where = np.ones(len(one), bool)
        for pv in pvecs:
            where &= pv == one
        for i, (u, x) in enumerate(zip(imgs, V.var_vecs(n))):
            bad = np.nonzero(where & (u != x))[0]
            if len(bad):
                report["quasi_identity"] = False
                wit = V.describe_coordinate(int(bad[0]), n)
                wit["query"] = f"p = 1 => tau(x{i + 1}) = x{i + 1}"
                report["failures"].append(wit)
                break
    ok = report["unifies"] and report["quasi_identity"] is not False
    return ok, report


def max_rank(V, k_bound):
    """Largest minimal generating-set size among subalgebras of the
    generators that are generated by at most k_bound elements."""
    return cached(V, ("max_rank", k_bound), lambda: _max_rank(V, k_bound))


def _max_rank(V, k_bound):
    best = 0
    for A in V.generators:
        seen = {}
        for m in range(k_bound + 1):
            for q in itertools.combinations(range(A.size), m):
                U = tuple(subuniverse(A, list(q)))
                if U not in seen:
                    seen[U] = m
        best = max([best] + list(seen.values()))
    return best


def verify_mgu_reproductive(V, t, cert, k_bound, reduce=True, cap=None):
    """Check sigma o tau = sigma for every sigma: F_n -> F_k with sigma(t) = 1.

    All such sigma are enumerated (tuples of F_k elements, pruned coordinate
    by coordinate).  A counterexample into F_k also yields one into F_m,
    where m is the rank of the subalgebra generated at the failing
    coordinate, so with ``reduce`` only k up to the largest such rank are
    enumerated.  Returns (ok, report).
    """
    cap = V.caps["max_hom_search"] if cap is None else cap
    terms = cert.terms if cert is not None else [t]
    n = cert.n if cert is not None else max_var(t)
    taus = cert.tau
    top = min(k_bound, max_rank(V, k_bound)) if reduce else k_bound
    report = {"k_bound": k_bound, "checked_k": [], "counterexample": None,
              "unifiers": {}}
    for k in range(top + 1):
        F = V.free(k).build()
        rel = _reproductive_relation(V, terms, taus, n, k)
        vecs = np.ascontiguousarray(F.vectors)
        status, tup, coord, count = K.tuple_search(
            vecs, n, rel.S, _ext_stack(rel), rel.bad, cap, False, np.full(n, -1, np.int64))
        if status < 0:
            raise CapExceeded("reproductive check nodes", cap)
        report["checked_k"].append(k)
        report["unifiers"][k] = int(count)
        if status == 1:
            report["counterexample"] = {
                "k": k, "sigma": [format_term(F.rep_term(int(i)), V.signature) for i in tup],
                "coordinate": V.describe_coordinate(int(coord), k)}
            return False, report
    report["reduced"] = top < k_bound
    return True, report


def _reproductive_relation(V, terms, taus, n, k):
    def admissible(A, lo, hi, tuples):
        good = np.ones(len(tuples), bool)
        for p in terms:
            good &= np.asarray(eval_on_columns(p, A, tuples.T)) == A.one
        return np.repeat(good[None, :], hi - lo, axis=0)

    rel = _CoordinateRelation(V, k, n, admissible)
    bad = np.zeros_like(rel.rel)
    S = rel.S
    for A, lo, hi in V.block_slices(k):
        tuples = _tuples(A.size, n)
        codes = np.zeros(len(tuples), np.int64)
        for i in range(n):
            codes = codes * S + tuples[:, i]
        fixed = np.ones(len(tuples), bool)
        for i, u in enumerate(taus):
            fixed &= np.asarray(eval_on_columns(u, A, tuples.T)) == tuples[:, i]
        bad[lo:hi, codes] = rel.rel[lo:hi, codes] & ~fixed[None, :]
    rel.bad = bad
    return rel


# ------------------------------------------------------------------ systems

def solve_system(V, equations, method="auto"):
    """A projective unifier for a finite system of equations.

    The system becomes matching problems p_1..p_k; a projective unifier of
    p_1 is composed with projective unifiers of the images of the later
    terms.  The result fixes every x_i modulo the join of the filters [p_j).
    """
    from .synthesis import synthesize_cp, synthesize_subtractive
    ps = reduce_to_matching(V, equations)
    n = max([max_var(p) for p in ps] + [0])
    for a, b in equations:
        n = max(n, max_var(V.parse(a) if isinstance(a, str) else a),
                max_var(V.parse(b) if isinstance(b, str) else b))
    cp = V.equiv_term is not None
    sigma = [Var(i) for i in range(1, n + 1)]
    steps = []
    for j, p in enumerate(ps):
        q = substitute(p, {i + 1: u for i, u in enumerate(sigma)})
        qv = V.vector(q, n)
        if is_one(V, qv, n):
            steps.append({"term": format_term(p, V.signature), "trivial": True})
            continue
        if ground_unifiable(V, q, n) is None:
            raise NotUnifiable(f"equation {j + 1} cannot be unified after the earlier ones")
        if cp:
            cert, trace = synthesize_cp(V, q, n=n, method=method)
        else:
            cert, trace = synthesize_subtractive(V, q, n=n, method=method)
        tau = {i + 1: u for i, u in enumerate(cert.tau)}
        sigma = [substitute(u, tau) for u in sigma]
        sigma = [element_term(V, V.vector(u, n), n, fallback=u) for u in sigma]
        steps.append({"term": format_term(p, V.signature), "trace_steps": len(trace.steps)})
    cert = UnifierCertificate(ps, sigma, "projective", "system", n=n,
                              notes={"steps": steps})
    ok, rep = verify_certificate(V, cert)
    joint = _in_join(V, ps, sigma, n, method)
    cert.verified = bool(ok and joint)
    if not cert.verified:
        raise AssertionError(f"composed unifier failed verification: {rep}")
    return cert


def _in_join(V, ps, sigma, n, method):
    """sigma(x_i) = x_i modulo the join of the filters [p_j), computed in F_n."""
    if n == 0:
        return True
    oracle = FilterOracle(V, n, method)
    z = np.ones(len(oracle.view), bool)
    for p in ps:
        z &= oracle.above(V.vector(p, n))
    imgs = tau_vectors(V, sigma, n)
    xs = V.var_vecs(n)
    cs = []
    for u, x in zip(imgs, xs):
        if V.equiv_term is not None:
            cs.append(V.equiv_vec(u, x, n))
        else:
            cs.append(V.sub_vec(u, x, n))
            cs.append(V.sub_vec(x, u, n))
    above = oracle.above_many(np.stack(cs))
    return bool((above | ~z[None, :]).all())
