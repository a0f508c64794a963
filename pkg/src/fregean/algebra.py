"""Finite algebras given by operation tables.

Congruences are normalized partition arrays (block ids in order of first
occurrence), so equal congruences have equal arrays.  Filters are the
1-cosets of congruences.
"""
from __future__ import annotations

import functools
import itertools
import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels as K
from .errors import CapExceeded, MissingAssignment
from .terms import Signature, Var, _postorder

__all__ = [
    "FiniteAlgebra", "Congruence", "Filter", "Homomorphism", "CongruenceLattice",
    "SIInfo", "evaluate", "term_table", "principal_congruence",
    "congruence_lattice", "filters", "meet_irreducible_filters",
    "subdirectly_irreducible", "quotient", "subuniverse", "subalgebra",
    "subalgebras", "generating_set", "all_homomorphisms", "endomorphisms",
    "exists_epi", "is_homomorphism", "isomorphic", "automorphisms",
    "direct_product", "check_one_regular", "check_congruence_orderable",
    "check_permuting", "normalize_labels",
]

DEFAULT_MAX_CONGRUENCES = 5000
DEFAULT_MAX_HOM_SEARCH = 10 ** 7


def normalize_labels(labels):
    labels = np.asarray(labels)
    _, first_idx, inv = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first_idx))
    return order[inv].astype(np.int64)


class FiniteAlgebra:
    """Universe {0..size-1}, one table per basic operation of ``signature``.

    ``tables[name]`` has shape ``(size,) * arity``; a constant is a 0-d array.
    Tables of derived symbols are computed on first use.
    """

    def __init__(self, size, one, tables, signature=None, names=None, label=None):
        self.size = int(size)
        if self.size < 1:
            raise ValueError("an algebra needs at least one element")
        self.one = int(one)
        if not 0 <= self.one < self.size:
            raise ValueError("one out of range")
        self.tables = {}
        for name, tab in tables.items():
            tab = np.asarray(tab, dtype=np.int64)
            if tab.ndim and tab.shape != (self.size,) * tab.ndim:
                raise ValueError(f"table {name!r} has shape {tab.shape}")
            if tab.size and (tab.min() < 0 or tab.max() >= self.size):
                raise ValueError(f"table {name!r} has entries out of range")
            tab.setflags(write=False)
            self.tables[name] = tab
        if signature is None:
            ops = [(n, t.ndim) for n, t in self.tables.items()]
            one_names = [n for n, t in self.tables.items() if t.ndim == 0 and int(t) == self.one]
            if not one_names:
                raise ValueError("no constant denotes the unit element")
            one_name = "1" if "1" in one_names else one_names[0]
            signature = Signature(ops, constant_one=one_name)
        self.signature = signature
        for name, k in signature.operations:
            if name not in self.tables:
                raise ValueError(f"missing table for {name!r}")
            if self.tables[name].ndim != k:
                raise ValueError(f"table {name!r} has arity {self.tables[name].ndim}, expected {k}")
        if int(self.tables[signature.constant_one]) != self.one:
            raise ValueError("the constant 1 does not denote the element `one`")
        self.names = list(names) if names is not None else None
        self.label = label
        self._derived = {}
        self._trans = None
        self._trans_t = None

    def __repr__(self):
        tag = f" {self.label}" if self.label else ""
        return f"<FiniteAlgebra{tag} size={self.size}>"

    def name_of(self, a):
        return self.names[a] if self.names else str(a)

    def element(self, name):
        if self.names and name in self.names:
            return self.names.index(name)
        return int(name)

    def table(self, op):
        if op in self.tables:
            return self.tables[op]
        tab = self._derived.get(op)
        if tab is None:
            k, definition = self.signature.derived[op]
            tab = term_table(definition, self, k).reshape((self.size,) * k)
            tab.setflags(write=False)
            self._derived[op] = tab
        return tab

    def basic_ops(self):
        return [(n, k) for n, k in self.signature.operations]

    def translations(self):
        """Rows of all basic translations: fix all but one argument of an op."""
        if self._trans is None:
            rows = []
            for name, k in self.signature.operations:
                tab = self.tables[name]
                for p in range(k):
                    rows.append(np.moveaxis(tab, p, -1).reshape(-1, self.size))
            if rows:
                tr = np.unique(np.concatenate(rows), axis=0)
                tr = tr[~(tr == tr[:, :1]).all(axis=1)] if self.size > 1 else tr[:0]
            else:
                tr = np.zeros((0, self.size), np.int64)
            self._trans = np.ascontiguousarray(tr, dtype=np.int64)
        return self._trans

    def translations_t(self):
        """Transposed translations as int32: row x lists every image of x."""
        if getattr(self, "_trans_t", None) is None:
            self._trans_t = np.ascontiguousarray(self.translations().T, dtype=np.int32)
        return self._trans_t

    # ---------------------------------------------------------------- json
    def to_json(self):
        ops = {}
        for name, k in self.signature.operations:
            ops[name] = {"arity": k, "table": [int(v) for v in self.tables[name].ravel()]}
        d = {"size": self.size, "one": self.one, "ops": ops}
        if self.names:
            d["names"] = list(self.names)
        return d

    @classmethod
    def from_json(cls, data, signature=None):
        if isinstance(data, (str, bytes)):
            data = json.loads(data)
        size = int(data["size"])
        tables = {}
        for name, spec in data["ops"].items():
            k = int(spec["arity"])
            flat = np.asarray(spec["table"], dtype=np.int64)
            if flat.size != size ** k:
                raise ValueError(f"table {name!r} has {flat.size} entries, expected {size ** k}")
            tables[name] = flat.reshape((size,) * k) if k else flat.reshape(())
        return cls(size, data["one"], tables, signature=signature, names=data.get("names"))


@dataclass(frozen=True)
class Homomorphism:
    source: FiniteAlgebra
    target: FiniteAlgebra
    map: tuple

    def __call__(self, a):
        return self.map[a]

    def is_onto(self):
        return len(set(self.map)) == self.target.size


# ------------------------------------------------------------- evaluation

def evaluate(t, A, assignment):
    """Value of ``t`` in ``A``; ``assignment`` maps x_i to an element, given as
    a dict keyed by i or a sequence whose position i-1 holds x_i."""
    if isinstance(assignment, dict):
        get = assignment.get
    else:
        seq = list(assignment)

        def get(i):
            return seq[i - 1] if 1 <= i <= len(seq) else None
    val = {}
    for s in _postorder(t):
        if isinstance(s, Var):
            v = get(s.index)
            if v is None:
                raise MissingAssignment(s.index)
            val[s] = int(v)
        else:
            tab = A.table(s.op)
            val[s] = int(tab[tuple(val[a] for a in s.args)])
    return val[t]


@functools.lru_cache(maxsize=256)
def assignment_columns(size, n):
    """Column i holds the value of x_{i+1} in the mixed-radix enumeration of
    size^n assignments (x1 most significant).  Cached, hence read-only."""
    idx = np.arange(size ** n, dtype=np.int64)
    cols = np.empty((n, size ** n), dtype=np.int64)
    for i in range(n):
        cols[i] = (idx // size ** (n - 1 - i)) % size
    cols.setflags(write=False)
    return cols


def term_table(t, A, n):
    """Values of ``t`` on all of A^n, flattened row-major."""
    cols = assignment_columns(A.size, n)
    return eval_on_columns(t, A, cols)


def eval_on_columns(t, A, cols):
    """Evaluate ``t`` coordinatewise; ``cols[i-1]`` is the vector of x_i."""
    length = cols.shape[1]
    val = {}
    for s in _postorder(t):
        if isinstance(s, Var):
            if not 1 <= s.index <= cols.shape[0]:
                raise MissingAssignment(s.index)
            val[s] = cols[s.index - 1]
        elif not s.args:
            val[s] = np.full(length, int(A.table(s.op)), dtype=np.int64)
        else:
            val[s] = A.table(s.op)[tuple(val[a] for a in s.args)]
    return np.asarray(val[t], dtype=np.int64)


# ------------------------------------------------------------- congruences

class Congruence:
    __slots__ = ("labels", "_key")

    def __init__(self, labels, algebra=None, check=True):
        lab = normalize_labels(labels)
        lab.setflags(write=False)
        self.labels = lab
        self._key = lab.tobytes()
        if check and algebra is not None and not is_compatible(algebra, lab):
            raise ValueError("partition is not compatible with the operations")

    @classmethod
    def _raw(cls, labels):
        obj = cls.__new__(cls)
        lab = np.asarray(labels, dtype=np.int64)
        lab.setflags(write=False)
        obj.labels = lab
        obj._key = lab.tobytes()
        return obj

    def __eq__(self, other):
        return isinstance(other, Congruence) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"Congruence({self.blocks()})"

    def __len__(self):
        return len(self.labels)

    @property
    def num_blocks(self):
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    def blocks(self):
        out = [[] for _ in range(self.num_blocks)]
        for x, b in enumerate(self.labels):
            out[b].append(x)
        return out

    def related(self, a, b):
        return self.labels[a] == self.labels[b]

    def block_of(self, a):
        return [x for x in range(len(self.labels)) if self.labels[x] == self.labels[a]]

    def __le__(self, other):
        reps = np.zeros(self.num_blocks, np.int64)
        reps[self.labels[::-1]] = np.arange(len(self.labels))[::-1]
        return bool((other.labels == other.labels[reps[self.labels]]).all())

    def __lt__(self, other):
        return self != other and self <= other

    def join(self, other):
        return Congruence._raw(K.join_partitions(self.labels, other.labels))

    def meet(self, other):
        n = len(self.labels)
        return Congruence._raw(normalize_labels(self.labels * n + other.labels))

    def is_identity(self):
        return self.num_blocks == len(self.labels)

    def is_total(self):
        return self.num_blocks == 1

    def matrix(self):
        return self.labels[:, None] == self.labels[None, :]


def is_compatible(A, labels):
    labels = np.asarray(labels)
    for name, k in A.signature.operations:
        if k == 0:
            continue
        tab = A.tables[name]
        for p in range(k):
            rows = np.moveaxis(tab, p, -1).reshape(-1, A.size)
            img = labels[rows]
            # within each block the translated images must share a block
            for blk in range(int(labels.max()) + 1):
                members = np.nonzero(labels == blk)[0]
                if len(members) > 1:
                    sub = img[:, members]
                    if not (sub == sub[:, :1]).all():
                        return False
    return True


def identity_congruence(A):
    return Congruence._raw(np.arange(A.size, dtype=np.int64))


def total_congruence(A):
    return Congruence._raw(np.zeros(A.size, dtype=np.int64))


def principal_congruence(A, a, b):
    tr = A.translations_t()
    lab = K.close_pairs(tr, np.array([a], np.int64), np.array([b], np.int64))
    return Congruence._raw(lab)


def congruence_generated(A, pairs, base=None):
    tr = A.translations_t()
    xs = np.array([p[0] for p in pairs], np.int64)
    ys = np.array([p[1] for p in pairs], np.int64)
    if base is None:
        return Congruence._raw(K.close_pairs(tr, xs, ys))
    return Congruence._raw(K.close_from(tr, base.labels, xs, ys))


def _principal_one(A):
    """Theta(1, a) for every element a (row a)."""
    tr = A.translations_t()
    xs = np.full(A.size, A.one, np.int64)
    ys = np.arange(A.size, dtype=np.int64)
    return K.all_principal(tr, xs, ys)


class CongruenceLattice:
    """All congruences of a finite algebra, sorted by refinement (finest first)."""

    def __init__(self, algebra, congruences):
        self.algebra = algebra
        self.items = list(congruences)
        self._index = {c: i for i, c in enumerate(self.items)}
        self._leq = None
        self._covers = None

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __getitem__(self, i):
        return self.items[i]

    def index(self, c):
        return self._index[c]

    @property
    def labels(self):
        return np.array([c.labels for c in self.items])

    def leq_matrix(self):
        if self._leq is None:
            L = self.labels
            m, n = L.shape
            leq = np.zeros((m, m), dtype=bool)
            for i in range(m):
                reps = np.zeros(int(L[i].max()) + 1, np.int64)
                reps[L[i][::-1]] = np.arange(n)[::-1]
                leq[i] = (L == L[:, reps[L[i]]]).all(axis=1)
            self._leq = leq
        return self._leq

    def join(self, a, b):
        return a.join(b)

    def meet(self, a, b):
        return a.meet(b)

    def bottom(self):
        return self.items[0]

    def top(self):
        return self.items[-1]

    def upper_cover_meets(self):
        """For each congruence, the meet of all strictly larger ones (or None at the top)."""
        if self._covers is None:
            leq = self.leq_matrix()
            out = []
            for i, c in enumerate(self.items):
                above = [j for j in np.nonzero(leq[i])[0] if j != i]
                if not above:
                    out.append(None)
                    continue
                m = self.items[above[0]]
                for j in above[1:]:
                    m = m.meet(self.items[j])
                out.append(m)
            self._covers = out
        return self._covers

    def meet_irreducibles(self):
        """Pairs (eta, eta_plus) of completely meet-irreducible congruences."""
        res = []
        for c, m in zip(self.items, self.upper_cover_meets()):
            if m is not None and m != c:
                res.append((c, m))
        return res

    def atoms(self):
        leq = self.leq_matrix()
        out = []
        for i in range(1, len(self.items)):
            below = [j for j in np.nonzero(leq[:, i])[0] if j != i]
            if below == [0]:
                out.append(self.items[i])
        return out


def congruence_lattice(A, cap=DEFAULT_MAX_CONGRUENCES, one_generated=False):
    """Join-closure of the principal congruences.

    With ``one_generated`` only the congruences Theta(1, a) are used as
    generators; this yields every congruence exactly when A is 1-regular.
    """
    n = A.size
    if one_generated:
        prin = _principal_one(A)
    else:
        pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
        if pairs:
            xs = np.array([p[0] for p in pairs], np.int64)
            ys = np.array([p[1] for p in pairs], np.int64)
            prin = K.all_principal(A.translations_t(), xs, ys)
        else:
            prin = np.zeros((0, n), np.int64)
        prin = np.concatenate([np.arange(n, dtype=np.int64)[None, :], prin])
    prin = np.unique(prin, axis=0)
    seen = {}
    for row in prin:
        seen[row.tobytes()] = row
    if len(seen) > cap:
        raise CapExceeded("number of congruences", cap)
    frontier = list(seen.values())
    while frontier:
        new = []
        for c in frontier:
            joined = K.join_many(c, prin)
            for row in np.unique(joined, axis=0):
                key = row.tobytes()
                if key not in seen:
                    seen[key] = row
                    new.append(row)
                    if len(seen) > cap:
                        raise CapExceeded("number of congruences", cap)
        frontier = new
    rows = sorted(seen.values(), key=lambda r: (-(int(r.max()) + 1), tuple(r)))
    return CongruenceLattice(A, [Congruence._raw(r) for r in rows])


def one_generated_meet_irreducibles(A, cap=DEFAULT_MAX_CONGRUENCES):
    """Completely meet-irreducible congruences of a 1-regular algebra.

    Returns ``(pairs, count)``: the pairs (theta, theta_plus), finest first,
    and the number of congruences visited.  Congruences are the joins of the
    Theta(1, a); for each one the joins with a single further Theta(1, a) are
    its candidate upper covers, and by 1-regularity their meet is read off
    the intersection of the 1-classes.  theta is meet-irreducible exactly
    when that intersection is larger than its own 1-class.  Elements in one
    theta-class give the same join, so one per class is enough.
    """
    n = A.size
    by_elem = _principal_one(A)
    prin = np.unique(by_elem, axis=0)
    mult = np.random.default_rng(7).integers(1, 2 ** 63, size=n, dtype=np.uint64) | np.uint64(1)
    bottom = np.arange(n, dtype=np.int64)
    seen = {bottom.tobytes(): bottom}
    for row in prin:
        seen.setdefault(row.tobytes(), row)
    frontier = list(seen.values())
    pairs = []
    done = set()
    while frontier:
        new = []
        for c in frontier:
            key = c.tobytes()
            if key in done:
                continue
            done.add(key)
            _, reps = np.unique(c, return_index=True)
            reps = reps[c[reps] != c[A.one]]
            if len(reps) == 0:
                continue
            joined = K.join_many(c, by_elem[reps])
            hs = K.hash_rows(joined, mult)
            _, first = np.unique(hs, return_index=True)
            joined = joined[np.sort(first)]
            cmask = c == c[A.one]
            masks = joined == joined[:, A.one:A.one + 1]
            bigger = (masks != cmask[None, :]).any(axis=1)
            for row in joined[bigger]:
                k = row.tobytes()
                if k not in seen:
                    seen[k] = row
                    new.append(row)
                    if len(seen) > cap:
                        raise CapExceeded("number of congruences", cap)
            if bigger.any():
                inter = masks[bigger].all(axis=0)
                if (inter != cmask).any():
                    cover = joined[bigger][(masks[bigger] == inter[None, :]).all(axis=1)][0]
                    pairs.append((Congruence._raw(c), Congruence._raw(cover)))
        frontier = new
    pairs.sort(key=lambda p: (-p[0].num_blocks, tuple(p[0].labels)))
    return pairs, len(seen)


# ----------------------------------------------------------------- filters

class Filter:
    """The 1-coset of a congruence; keeps the congruence it came from."""
    __slots__ = ("members", "congruence")

    def __init__(self, members, congruence):
        self.members = frozenset(int(m) for m in members)
        self.congruence = congruence

    @classmethod
    def of(cls, A, theta):
        return cls(np.nonzero(theta.labels == theta.labels[A.one])[0], theta)

    def __contains__(self, a):
        return int(a) in self.members

    def __eq__(self, other):
        return isinstance(other, Filter) and self.members == other.members

    def __hash__(self):
        return hash(self.members)

    def __le__(self, other):
        return self.members <= other.members

    def __lt__(self, other):
        return self.members < other.members

    def __len__(self):
        return len(self.members)

    def __repr__(self):
        return f"Filter({sorted(self.members)})"


def filters(A, cap=DEFAULT_MAX_CONGRUENCES, lattice=None):
    lat = lattice or congruence_lattice(A, cap)
    return [Filter.of(A, c) for c in lat]


def meet_irreducible_filters(A, cap=DEFAULT_MAX_CONGRUENCES, lattice=None):
    """Completely meet-irreducible filters with their unique upper covers."""
    lat = lattice or congruence_lattice(A, cap)
    return [(Filter.of(A, c), Filter.of(A, m)) for c, m in lat.meet_irreducibles()]


class SIInfo(NamedTuple):
    star: int | None
    monolith: Congruence


def subdirectly_irreducible(A, lattice=None):
    """Monolith and largest non-unit element of a subdirectly irreducible A.

    Returns None when A is not SI.  When A is congruence orderable the star
    is the largest non-unit element of the order a <= b iff
    Theta(1,b) <= Theta(1,a); otherwise it is read off the monolith's 1-block
    when that block has two elements.
    """
    if A.size < 2:
        return None
    lat = lattice or congruence_lattice(A)
    above = lat.upper_cover_meets()[0]
    if above is None or above == lat[0]:
        return None
    monolith = above
    star = None
    ok, _ = check_congruence_orderable(A)
    if ok:
        prin = [Congruence._raw(r) for r in _principal_one(A)]
        for m in range(A.size):
            if m == A.one:
                continue
            if all(prin[m] <= prin[a] for a in range(A.size) if a != A.one):
                star = m
                break
    else:
        block = [x for x in monolith.block_of(A.one) if x != A.one]
        if len(block) == 1:
            star = block[0]
    return SIInfo(star, monolith)


def quotient(A, theta):
    """The algebra A/theta and the natural map (element -> block)."""
    lab = theta.labels
    k = theta.num_blocks
    reps = np.zeros(k, np.int64)
    reps[lab[::-1]] = np.arange(A.size)[::-1]
    tables = {}
    for name, ar in A.signature.operations:
        tab = A.tables[name]
        if ar == 0:
            tables[name] = np.array(lab[int(tab)])
        else:
            tables[name] = lab[tab[np.ix_(*([reps] * ar))]]
    names = None
    if A.names:
        names = ["/".join(A.names[x] for x in np.nonzero(lab == b)[0]) for b in range(k)]
    Q = FiniteAlgebra(k, int(lab[A.one]), tables, signature=A.signature, names=names)
    return Q, tuple(int(v) for v in lab)


# ------------------------------------------------------------ subalgebras

def subuniverse(A, gens):
    """Smallest subuniverse containing ``gens`` (sorted list)."""
    have = np.zeros(A.size, dtype=bool)
    for name, k in A.signature.operations:
        if k == 0:
            have[int(A.tables[name])] = True
    for g in gens:
        have[int(g)] = True
    while True:
        cur = np.nonzero(have)[0]
        new = have.copy()
        for name, k in A.signature.operations:
            if k == 0:
                continue
            vals = A.tables[name][np.ix_(*([cur] * k))]
            new[vals.ravel()] = True
        if (new == have).all():
            return [int(x) for x in cur]
        have = new


def subalgebra(A, universe):
    """The subalgebra on ``universe`` and its embedding (tuple of A-elements)."""
    universe = sorted(int(x) for x in universe)
    pos = {x: i for i, x in enumerate(universe)}
    idx = np.array(universe, np.int64)
    tables = {}
    for name, k in A.signature.operations:
        tab = A.tables[name]
        if k == 0:
            tables[name] = np.array(pos[int(tab)])
        else:
            sub = tab[np.ix_(*([idx] * k))]
            tables[name] = np.vectorize(pos.__getitem__, otypes=[np.int64])(sub)
    names = [A.names[x] for x in universe] if A.names else None
    S = FiniteAlgebra(len(universe), pos[A.one], tables, signature=A.signature, names=names)
    return S, tuple(universe)


def subalgebras(A, cap=4096):
    """All subuniverses of A (closures of all subsets), sorted by (size, elements)."""
    if 2 ** A.size > cap * 64:
        raise CapExceeded("subset enumeration for subalgebras", cap)
    found = set()
    base = subuniverse(A, [])
    found.add(tuple(base))
    frontier = [tuple(base)]
    while frontier:
        new = []
        for U in frontier:
            for x in range(A.size):
                if x not in U:
                    V = tuple(subuniverse(A, list(U) + [x]))
                    if V not in found:
                        found.add(V)
                        new.append(V)
                        if len(found) > cap:
                            raise CapExceeded("number of subalgebras", cap)
        frontier = new
    return sorted(found, key=lambda u: (len(u), u))


def generating_set(A):
    """Greedy generating set: repeatedly add the element whose addition grows
    the generated subuniverse most (smallest index on ties)."""
    gens = []
    cur = subuniverse(A, [])
    while len(cur) < A.size:
        best, best_u = None, None
        for x in range(A.size):
            if x in cur:
                continue
            u = subuniverse(A, gens + [x])
            if best_u is None or len(u) > len(best_u):
                best, best_u = x, u
        gens.append(best)
        cur = best_u
    return gens


def _derivation_plan(A, gens):
    """Order in which every element is obtained from constants and ``gens``."""
    known = {}
    plan = []
    for name, k in A.signature.operations:
        if k == 0:
            v = int(A.tables[name])
            if v not in known:
                known[v] = len(plan)
                plan.append((v, name, ()))
    for g in gens:
        if g not in known:
            known[g] = len(plan)
            plan.append((g, None, ()))
    changed = True
    while changed:
        changed = False
        elems = list(known)
        for name, k in A.signature.operations:
            if k == 0:
                continue
            tab = A.tables[name]
            for args in itertools.product(elems, repeat=k):
                v = int(tab[args])
                if v not in known:
                    known[v] = len(plan)
                    plan.append((v, name, args))
                    changed = True
    return plan


def is_homomorphism(A, B, h):
    h = np.asarray(h, np.int64)
    if h[A.one] != B.one:
        return False
    for name, k in A.signature.operations:
        ta, tb = A.tables[name], B.tables[name]
        if k == 0:
            if h[int(ta)] != int(tb):
                return False
            continue
        lhs = h[ta]
        grids = np.meshgrid(*([h] * k), indexing="ij")
        rhs = tb[tuple(grids)]
        if not (lhs == rhs).all():
            return False
    return True


def all_homomorphisms(A, B, cap=DEFAULT_MAX_HOM_SEARCH):
    gens = generating_set(A)
    if B.size ** len(gens) > cap:
        raise CapExceeded("homomorphism candidates", cap)
    plan = _derivation_plan(A, gens)
    out = []
    for imgs in itertools.product(range(B.size), repeat=len(gens)):
        gimg = dict(zip(gens, imgs))
        h = [-1] * A.size
        for v, name, args in plan:
            if name is None:
                w = gimg[v]
            elif not args:
                w = int(B.tables[name])
            else:
                w = int(B.tables[name][tuple(h[a] for a in args)])
            h[v] = w
        if is_homomorphism(A, B, h):
            out.append(Homomorphism(A, B, tuple(h)))
    return out


def endomorphisms(A, cap=DEFAULT_MAX_HOM_SEARCH):
    return all_homomorphisms(A, A, cap)


def exists_epi(A, B, cap=DEFAULT_MAX_HOM_SEARCH):
    return any(h.is_onto() for h in all_homomorphisms(A, B, cap))


def automorphisms(A):
    return [h for h in endomorphisms(A) if len(set(h.map)) == A.size]


def isomorphic(A, B):
    if A.size != B.size:
        return False
    return any(len(set(h.map)) == B.size for h in all_homomorphisms(A, B))


def direct_product(A, B):
    n, m = A.size, B.size
    tables = {}
    for name, k in A.signature.operations:
        ta, tb = A.tables[name], B.tables[name]
        if k == 0:
            tables[name] = np.array(int(ta) * m + int(tb))
            continue
        shape = (n * m,) * k
        idx = np.indices(shape).reshape(k, -1)
        a_args = tuple(idx[i] // m for i in range(k))
        b_args = tuple(idx[i] % m for i in range(k))
        tables[name] = (ta[a_args] * m + tb[b_args]).reshape(shape)
    names = None
    if A.names or B.names:
        names = [f"({A.name_of(i)},{B.name_of(j)})" for i in range(n) for j in range(m)]
    return FiniteAlgebra(n * m, A.one * m + B.one, tables, signature=A.signature, names=names)


# ----------------------------------------------------------- diagnostics

def check_one_regular(A, lattice=None):
    """(ok, witness): witness is a pair of distinct congruences with equal 1-cosets."""
    lat = lattice or congruence_lattice(A)
    seen = {}
    for c in lat:
        key = frozenset(np.nonzero(c.labels == c.labels[A.one])[0].tolist())
        if key in seen:
            return False, (seen[key], c)
        seen[key] = c
    return True, None


def check_congruence_orderable(A):
    """(ok, witness): witness (a, b) with a != b and Theta(1,a) = Theta(1,b)."""
    prin = _principal_one(A)
    seen = {}
    for a in range(A.size):
        key = prin[a].tobytes()
        if key in seen:
            return False, (seen[key], a)
        seen[key] = a
    return True, None


def check_permuting(A, lattice=None):
    """(ok, witness): witness (alpha, beta, (x, z)) with (x,z) in alpha.beta \\ beta.alpha."""
    lat = lattice or congruence_lattice(A)
    mats = [c.matrix().astype(np.int64) for c in lat]
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            ab = (mats[i] @ mats[j]) > 0
            ba = (mats[j] @ mats[i]) > 0
            if not (ab == ba).all():
                diff = np.argwhere(ab & ~ba)
                if len(diff):
                    return False, (lat[i], lat[j], tuple(int(v) for v in diff[0]))
                diff = np.argwhere(ba & ~ab)
                return False, (lat[j], lat[i], tuple(int(v) for v in diff[0]))
    return True, None
