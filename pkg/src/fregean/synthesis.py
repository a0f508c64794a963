"""Constructive projective unifiers.

Three descent loops over the completely meet-irreducible filters of F_n:

* ``synthesize_cp``: the g_C loop for congruence permutable contexts,
  descending on k(p), the number of classes W_C meeting N(p).
* ``synthesize_subtractive``: x_i -> s(t, x_i) on the variables that are
  the star of a filter where t is the star.
* ``synthesize_unifier_height``: a plain unifier from the constants test,
  by x_i -> x_i <-> t below a filter avoiding t(1,...,1).

The last two descend on the number of meet-irreducibles containing the
current term, which strictly grows as its principal filter shrinks.
Every loop records a trace and checks its descent invariants as it goes.
"""
from __future__ import annotations

import json

import numpy as np

from .errors import CapExceeded, ConditionThreeFailed, NotUnifiable, PreconditionFailed
from .terms import Var, max_var, substitute
from .unification import (FilterOracle, UnifierCertificate, cached, element_term,
                          ground_unifiable, is_one, verify_certificate)


class InvariantViolation(AssertionError):
    """A descent invariant of a synthesis loop failed."""


class SynthesisTrace:
    """Steps of a synthesis loop and the resulting substitution."""

    def __init__(self, algorithm, n):
        self.algorithm = algorithm
        self.n = n
        self.steps = []
        self.final_tau = None

    def __len__(self):
        return len(self.steps)

    def to_json(self, sig=None):
        from .terms import format_term
        out = {"algorithm": self.algorithm, "n": self.n, "steps": []}
        for st in self.steps:
            d = {}
            for key, val in st.items():
                if key == "p":
                    d[key] = format_term(val, sig)
                elif key == "g":
                    d[key] = {f"x{i}": format_term(u, sig) for i, u in sorted(val.items())}
                else:
                    d[key] = val
            out["steps"].append(d)
        if self.final_tau is not None:
            out["final_tau"] = [format_term(u, sig) for u in self.final_tau]
        return out

    def dumps(self, sig=None):
        return json.dumps(self.to_json(sig), ensure_ascii=False)


# ------------------------------------------------------------------ helpers

def _check(cond, what):
    if not cond:
        raise InvariantViolation(what)


def _shorten(V, u, n, vec):
    return element_term(V, vec, n, fallback=u)


def _unwind(V, n, gs, last_terms, last_vecs):
    """tau = sigma o g_1 o ... o g_r read backwards: each g maps x_i to a
    term over x_1..x_n and the images are substituted into it."""
    terms, vecs = list(last_terms), list(last_vecs)
    for g_terms, g_vecs in reversed(gs):
        vecs = [V.apply(gv, vecs, n, n) for gv in g_vecs]
        sub = {i + 1: u for i, u in enumerate(terms)}
        terms = [_shorten(V, substitute(gt, sub), n, v) for gt, v in zip(g_terms, vecs)]
    return terms, vecs


def _identity(V, n):
    return [Var(i) for i in range(1, n + 1)], V.var_vecs(n)


def _step_cap(V):
    return V.caps["max_synthesis_steps"]


def _finish(V, t, n, terms, vecs, kind, provenance, trace, check=True):
    tv = V.vector(t, n)
    _check(is_one(V, V.apply(tv, vecs, n, n), n), "the composed substitution unifies t")
    trace.final_tau = terms
    cert = UnifierCertificate([t], terms, kind, provenance, n=n)
    if check:
        ok, rep = verify_certificate(V, cert)
        if not ok:
            raise InvariantViolation(f"certificate failed verification: {rep['failures']}")
        if kind == "projective" and n > 0:
            oracle = FilterOracle(V, n)
            xs = V.var_vecs(n)
            diffs = np.stack([V.equiv_vec(u, x, n) if V.equiv_term is not None
                              else V.sub_vec(u, x, n) for u, x in zip(vecs, xs)])
            if V.equiv_term is None:
                diffs = np.concatenate([diffs, np.stack([V.sub_vec(x, u, n)
                                                         for u, x in zip(vecs, xs)])])
            _check(bool(oracle.contains_many(tv, diffs).all()),
                   "tau(x_i) is congruent to x_i modulo Theta(t, 1)")
        cert.verified = True
    return cert


# --------------------------------------------------------------- classes W_C

def classify_meet_irreducibles(V, n, f, method="auto"):
    """Partition the listed meet-irreducibles eta of F_n into classes W_C.

    ``f`` gives the images of x1..xn (terms or vectors).  Two-element
    quotients go to C = {i : x_i and f(x_i) differ modulo eta}; larger ones
    to C = {i : x_i is the star modulo eta}.  Keys are tuples of 1-based
    variable indices; values are lists of entry indices of ``V.si_view``.
    """
    view = V.si_view(n, method)
    if n == 0 or len(view) == 0:
        return {}
    fv = [V.vector(u, n) if not isinstance(u, np.ndarray) else u for u in f]
    fe = view.eval_many(np.stack(fv))                  # n x E
    out = {}
    for e in range(len(view)):
        if view.qsize[e] == 2:
            C = tuple(i + 1 for i in range(n) if view.gens[e, i] != fe[i, e])
        else:
            C = tuple(i + 1 for i in range(n) if view.gens[e, i] == view.star[e])
        out.setdefault(C, []).append(e)
    return dict(sorted(out.items()))


# --------------------------------------------------------------------- cp

def synthesize_cp(V, t, n=None, method="auto"):
    """Projective unifier by the g_C loop.  Returns (certificate, trace)."""
    from .variety.checks import chi_identity_vec
    n = max_var(t) if n is None else n
    if V.equiv_term is None:
        raise PreconditionFailed("equivalence term", "the g_C loop needs one")
    tv = V.vector(t, n)
    if not chi_identity_vec(V, tv, n):
        raise PreconditionFailed("chi identity", "t(x1yy,...,xnyy) differs from t(x1,...,xn)yy")
    ground = ground_unifiable(V, t, n)
    if ground is None:
        raise NotUnifiable("no closed terms make t equal to 1")
    trace = SynthesisTrace("cp", n)
    fvecs = ground["vectors"]
    one = V.one_vec(n)
    view = V.si_view(n, method)
    classes = classify_meet_irreducibles(V, n, fvecs, method)
    cls_of = np.empty(len(view), np.int64)
    keys = list(classes)
    for j, C in enumerate(keys):
        cls_of[classes[C]] = j
    xs = V.var_vecs(n)

    def nset(pv):
        return view.eval(pv) == view.star

    def kval(mask):
        return len(set(cls_of[mask].tolist()))

    p, pv = t, tv
    N = nset(pv)
    k = kval(N)
    gs = []
    while k > 0:
        if len(gs) >= _step_cap(V):
            raise CapExceeded("synthesis steps", _step_cap(V))
        C = min(keys[j] for j in set(cls_of[N].tolist()))
        _check(len(C) > 0, "the chosen class has a nonempty variable set")
        g_terms, g_vecs = [], []
        for i in range(1, n + 1):
            a = V.equiv_vec(xs[i - 1], pv, n)
            at = V.equiv(Var(i), p)
            if i not in C:
                a = V.equiv_vec(a, pv, n)
                at = V.equiv(at, p)
            g_terms.append(at)
            g_vecs.append(a)
        qv = V.apply(pv, g_vecs, n, n)
        q = _shorten(V, substitute(p, {i + 1: u for i, u in enumerate(g_terms)}), n, qv)
        N2 = nset(qv)
        k2 = kval(N2)
        _check(k2 < k, "k strictly decreases")
        _check(not (N2 & ~N).any(), "N(g_C(p)) is contained in N(p)")
        _check(chi_identity_vec(V, qv, n), "g_C(p) satisfies the chi identity")
        _check(is_one(V, V.apply(qv, fvecs, n, n), n), "f(g_C(p)) = 1")
        _check(bool((V.equiv_vec(V.equiv_vec(qv, pv, n), pv, n) == qv).all()),
               "g_C(p) <-> p <-> p = g_C(p)")
        trace.steps.append({"p": p, "C": list(C), "g": {i + 1: u for i, u in enumerate(g_terms)},
                            "k_before": k, "k_after": k2,
                            "N_before": int(N.sum()), "N_after": int(N2.sum())})
        gs.append((g_terms, g_vecs))
        p, pv, N, k = q, qv, N2, k2
    if not (pv == one).all():
        raise InvariantViolation("k(p) = 0 but p is not 1; the filter list is not star separating")
    terms, vecs = _unwind(V, n, gs, *_identity(V, n))
    return _finish(V, t, n, terms, vecs, "projective", "synthesis_cp", trace), trace


# ------------------------------------------------------------- subtractive

def special_unifier_holds(V, t, n):
    tv = V.vector(t, n)
    one = V.one_vec(n)
    return is_one(V, V.apply(tv, [one] * n, n, n), n)


def synthesize_subtractive(V, t, n=None, method="auto", check_members=True):
    """Projective unifier by x_i -> s(t, x_i).  Returns (certificate, trace).

    Requires t(1,...,1) = 1.  With ``check_members`` the star of every SI
    member found must split off as a subuniverse (checked once per context).
    """
    from .variety.checks import si_members_check, validate_subtractive_term
    n = max_var(t) if n is None else n
    if V.subtractive_term is None:
        raise PreconditionFailed("subtractive term", "none is set")
    if not special_unifier_holds(V, t, n):
        raise PreconditionFailed("special_unifier", "t(1,...,1) is not 1")
    if check_members:
        if not validate_subtractive_term(V)[0]:
            raise PreconditionFailed("subtractive term", "the designated term fails its identities")
        rep = cached(V, "si_members_check", lambda: si_members_check(V, 2))
        if not rep["ok"]:
            raise PreconditionFailed("si members", f"offenders: {rep['offenders']}")
    trace = SynthesisTrace("subtractive", n)
    oracle = FilterOracle(V, n, method)
    view = oracle.view
    one = V.one_vec(n)
    xs = V.var_vecs(n)
    p, pv = t, V.vector(t, n)
    h = oracle.height(pv)
    gs = []
    while not (pv == one).all():
        if len(gs) >= _step_cap(V):
            raise CapExceeded("synthesis steps", _step_cap(V))
        cls = view.eval(pv)
        stars = np.nonzero(cls == view.star)[0]
        _check(len(stars) > 0, "some listed filter has t as its star")
        e = int(stars[0])
        S = [i + 1 for i in range(n) if view.gens[e, i] == view.star[e]]
        _check(len(S) > 0, "some variable is the star where t is")
        g_terms, g_vecs = [], []
        for i in range(1, n + 1):
            if i in S:
                g_terms.append(V.sub(p, Var(i)))
                g_vecs.append(V.sub_vec(pv, xs[i - 1], n))
            else:
                g_terms.append(Var(i))
                g_vecs.append(xs[i - 1])
        qv = V.apply(pv, g_vecs, n, n)
        q = _shorten(V, substitute(p, {i + 1: u for i, u in enumerate(g_terms)}), n, qv)
        h2 = oracle.height(qv)
        _check(h2 > h, "the principal filter strictly shrinks")
        trace.steps.append({"p": p, "eta": e, "S": S,
                            "g": {i: g_terms[i - 1] for i in S},
                            "height_before": h, "height_after": h2})
        gs.append((g_terms, g_vecs))
        p, pv, h = q, qv, h2
    terms, vecs = _unwind(V, n, gs, *_identity(V, n))
    return _finish(V, t, n, terms, vecs, "projective", "synthesis_subtractive", trace), trace


# ------------------------------------------------------------------ height

def synthesize_unifier_height(V, t, n=None, method="auto"):
    """A plain unifier from the constants test.  Returns (certificate, trace).

    While t(1,...,1) is not 1, take the first listed eta containing t with
    t(1,...,1) as its star; those eta are the maximal filters above [t)
    that avoid t(1,...,1).  Then x_i -> x_i <-> t for the x_i that are the
    star modulo eta.  Finally every variable goes to 1.
    """
    from .unification import check_unif_conditions
    from .variety.checks import check_variety_identities
    n = max_var(t) if n is None else n
    if V.equiv_term is None:
        raise PreconditionFailed("equivalence term", "the height loop needs one")
    if not cached(V, "variety_identities", lambda: check_variety_identities(V))["holds"]:
        raise PreconditionFailed("chi identities", "the variety fails them")
    if not check_unif_conditions(V, t, n, method)["cond4"]:
        raise PreconditionFailed("cond4", "[t) contains a constant other than 1")
    trace = SynthesisTrace("height", n)
    oracle = FilterOracle(V, n, method)
    view = oracle.view
    one = V.one_vec(n)
    ones = [one] * n
    xs = V.var_vecs(n)
    p, pv = t, V.vector(t, n)
    h = oracle.height(pv)
    gs = []
    while True:
        c = V.apply(pv, ones, n, n)
        if (c == one).all():
            break
        if len(gs) >= _step_cap(V):
            raise CapExceeded("synthesis steps", _step_cap(V))
        pc = view.eval_many(np.stack([pv, c]))
        cand = np.nonzero((pc[0] == view.one) & (pc[1] == view.star))[0]
        _check(len(cand) > 0, "a maximal filter above [t) avoids t(1,...,1)")
        e = int(cand[0])
        M = [i + 1 for i in range(n) if view.gens[e, i] == view.star[e]]
        _check(len(M) > 0, "some variable is the star of the chosen filter")
        g_terms, g_vecs = [], []
        for i in range(1, n + 1):
            if i in M:
                g_terms.append(V.equiv(Var(i), p))
                g_vecs.append(V.equiv_vec(xs[i - 1], pv, n))
            else:
                g_terms.append(Var(i))
                g_vecs.append(xs[i - 1])
        qv = V.apply(pv, g_vecs, n, n)
        q = _shorten(V, substitute(p, {i + 1: u for i, u in enumerate(g_terms)}), n, qv)
        h2 = oracle.height(qv)
        _check(h2 > h, "the principal filter strictly shrinks")
        trace.steps.append({"p": p, "mu": e, "M": M, "g": {i: g_terms[i - 1] for i in M},
                            "height_before": h, "height_after": h2})
        gs.append((g_terms, g_vecs))
        p, pv, h = q, qv, h2
    terms, vecs = _unwind(V, n, gs, [V.one()] * n, ones)
    return _finish(V, t, n, terms, vecs, "plain", "height_induction", trace), trace


# -------------------------------------------------------------- retraction

def idempotent_retraction(V, n, tau, phi_terms):
    """Idempotent power of the endomorphism tau of F_n and its kernel check.

    ``phi_terms`` generate the filter phi.  Requires tau(x_i) = x_i modulo
    phi.  Returns (rho, report) with rho = tau^k the first power satisfying
    tau^{2k} = tau^k.  The report compares ker rho with the congruence of
    phi: always through rho(p) = 1 for the generators p of phi (enough
    together with the congruence condition), and element by element when
    F_n is enumerable.
    """
    tau = list(tau)
    tv = [V.vector(u, n) if not isinstance(u, np.ndarray) else u for u in tau]
    xs = V.var_vecs(n)
    oracle = FilterOracle(V, n) if n else None
    z = None
    if n:
        z = np.ones(len(oracle.view), bool)
        for p in phi_terms:
            z &= oracle.above(V.vector(p, n))
        diffs = []
        for u, x in zip(tv, xs):
            if V.equiv_term is not None:
                diffs.append(V.equiv_vec(u, x, n))
            else:
                diffs += [V.sub_vec(u, x, n), V.sub_vec(x, u, n)]
        above = oracle.above_many(np.stack(diffs))
        bad = np.nonzero(~(above | ~z[None, :]).all(axis=1))[0]
        if len(bad):
            raise ConditionThreeFailed(f"tau(x{int(bad[0]) + 1}) is not congruent to "
                                       f"x{int(bad[0]) + 1} modulo phi")
    tau_terms = tau if not tau or not isinstance(tau[0], np.ndarray) else None
    power = list(tv)
    power_terms = tau_terms
    k = 1
    while True:
        square = [V.apply(u, power, n, n) for u in power]
        if all((a == b).all() for a, b in zip(square, power)):
            break
        power = [V.apply(u, tv, n, n) for u in power]
        if power_terms is not None:
            sub = {i + 1: u for i, u in enumerate(tau_terms)}
            power_terms = [_shorten(V, substitute(u, sub), n, v)
                           for u, v in zip(power_terms, power)]
        k += 1
        if k > _step_cap(V):
            raise CapExceeded("powers of tau", _step_cap(V))
    rho = power
    report = {"power": k, "generators_to_one": all(
        is_one(V, V.apply(V.vector(p, n), rho, n, n), n) for p in phi_terms)}
    report["kernel_equals_phi"] = report["generators_to_one"]
    report["exhaustive"] = False
    F = V.free(n)
    try:
        F.closure.ensure(V.caps["max_explicit_lattice"] * 20 + 1)
        small = F.closure.complete
    except CapExceeded:
        small = False
    if small and n:
        vecs = F.vectors
        images = vecs[:, V.gather_index(rho, n, n)]
        keys = oracle.view.eval_many(vecs)[:, z]
        ker = np.unique(images, axis=0, return_inverse=True)[1].ravel()
        phi = np.unique(keys, axis=0, return_inverse=True)[1].ravel()
        pairs = np.unique(np.stack([ker, phi], 1), axis=0)
        same = len(pairs) == ker.max() + 1 == phi.max() + 1
        report["exhaustive"] = True
        report["kernel_equals_phi"] = bool(same) and report["generators_to_one"]
    return {"vectors": rho, "terms": power_terms}, report
