"""Breadth-first closure of evaluation vectors.

An element is a vector of values, one per coordinate; a coordinate is a
pair (generator algebra, assignment of the variables).  Elements are found
round by round: round r holds the vectors first reachable by terms of depth
r.  Within a round, elements are ordered by the size of their representative
term, then operation order, then argument indices.  The same engine serves
free algebras (all assignments) and restricted searches (a chosen set of
assignments, as in term-condition searches).
"""
from __future__ import annotations

import itertools

import numpy as np

from .._kernels import apply_rows, binary_op_table, fresh_binary, table_insert, table_lookup
from ..algebra import FiniteAlgebra, assignment_columns
from ..errors import CapExceeded
from ..terms import App, Var

_CHUNK_CELLS = 4_000_000
_rng = np.random.default_rng(20240611)


class Closure:
    """Lazily enumerated subalgebra of a product of finite algebras.

    ``blocks`` is a list of ``(algebra, columns)``; ``columns[i]`` holds the
    value of variable x_{i+1} at each coordinate of the block.
    """

    def __init__(self, signature, blocks, nvars, cap):
        self.signature = signature
        self.blocks = blocks
        self.nvars = nvars
        self.cap = cap
        lengths = [cols.shape[1] for _, cols in blocks]
        self.offsets = np.cumsum([0] + lengths)
        self.L = int(self.offsets[-1])
        for A, _ in blocks:
            if A.size > 255:
                raise ValueError("closure vectors hold byte-sized values")
        self.ops = [(n, k) for n, k in signature.operations if k > 0]
        self._mult = (_rng.integers(1, 2 ** 63, size=max(self.L, 1), dtype=np.uint64) | np.uint64(1))
        self.vecs = np.zeros((16, self.L), np.uint8)
        self.hashes = np.zeros(16, np.uint64)
        self._keys = np.zeros(64, np.uint64)
        self._vals = np.full(64, -1, np.int64)
        self._op_tabs = {}
        size = np.concatenate([np.full(cols.shape[1], A.size, np.int64) for A, cols in blocks]) \
            if blocks else np.zeros(0, np.int64)
        for name, k in self.ops:
            flats, offs, base = [], [], 0
            for A, cols in blocks:
                flat = np.asarray(A.tables[name], np.uint8).ravel()
                flats.append(flat)
                offs.append(np.full(cols.shape[1], base, np.int64))
                base += len(flat)
            self._op_tabs[name] = (np.concatenate(flats) if flats else np.zeros(0, np.uint8),
                                   np.concatenate(offs) if offs else np.zeros(0, np.int64), size)
        self.N = 0
        self._by_hash = {}
        self.prov = []
        self.sizes = []
        self.rounds = []            # (start, stop) per round
        self.complete = False
        self.capped = False
        self._terms = {}
        self.var_elements = []
        self._seed()

    # ------------------------------------------------------------ storage
    def _hash_rows(self, rows):
        if self.L == 0:
            return np.zeros(len(rows), np.uint64)
        with np.errstate(over="ignore"):
            return (rows.astype(np.uint64) * self._mult[None, :]).sum(axis=1, dtype=np.uint64)

    def _append(self, row, h, prov, size):
        if self.N == len(self.vecs):
            grow = max(16, self.N)
            self.vecs = np.concatenate([self.vecs, np.zeros((grow, self.L), np.uint8)])
            self.hashes = np.concatenate([self.hashes, np.zeros(grow, np.uint64)])
        self.vecs[self.N] = row
        self.hashes[self.N] = h
        if 2 * (self.N + 1) > len(self._keys):
            self._rehash(4 * len(self._keys))
        table_insert(self._keys, self._vals, np.uint64(h), self.N)
        self._by_hash.setdefault(int(h), []).append(self.N)
        self.prov.append(prov)
        self.sizes.append(size)
        self.N += 1
        return self.N - 1

    def lookup(self, row):
        row = np.asarray(row, np.uint8)
        h = int(self._hash_rows(row[None, :])[0])
        for idx in self._by_hash.get(h, ()):
            if np.array_equal(self.vecs[idx], row):
                return idx
        return None

    def _rehash(self, capacity):
        self._keys = np.zeros(capacity, np.uint64)
        self._vals = np.full(capacity, -1, np.int64)
        for i in range(self.N):
            table_insert(self._keys, self._vals, self.hashes[i], i)

    def _known_mask(self, rows, hs):
        """Rows already present as elements (exact, hash collisions checked)."""
        return table_lookup(self._keys, self._vals, self.vecs, rows, hs) >= 0

    def lookup_many(self, rows):
        """Indices of known rows, -1 for the others (no extension)."""
        rows = np.ascontiguousarray(rows, np.uint8)
        return table_lookup(self._keys, self._vals, self.vecs, rows, self._hash_rows(rows))

    # ------------------------------------------------------------ rounds
    def _seed(self):
        sig = self.signature
        seeds = []
        one_row = np.concatenate([np.full(cols.shape[1], A.one, np.uint8) for A, cols in self.blocks]) \
            if self.blocks else np.zeros(0, np.uint8)
        seeds.append((one_row, ("const", sig.constant_one)))
        for i in range(self.nvars):
            row = np.concatenate([cols[i].astype(np.uint8) for _, cols in self.blocks]) \
                if self.blocks else np.zeros(0, np.uint8)
            seeds.append((row, ("var", i + 1)))
        for name in sig.constants():
            if name == sig.constant_one:
                continue
            row = np.concatenate([np.full(cols.shape[1], int(A.tables[name]), np.uint8)
                                  for A, cols in self.blocks]) if self.blocks else np.zeros(0, np.uint8)
            seeds.append((row, ("const", name)))
        for row, prov in seeds:
            idx = self.lookup(row)
            if idx is None:
                idx = self._append(row, self._hash_rows(row[None, :])[0], prov, 1)
            if prov[0] == "var":
                self.var_elements.append(idx)
        self.rounds.append((0, self.N))

    def _apply(self, name, args):
        """Vectors of op(name) applied to element index tuples (args: m x k)."""
        return self._apply_hash(name, args)[0]

    def _apply_hash(self, name, args):
        flat, offs, size = self._op_tabs[name]
        return apply_rows(self.vecs, np.ascontiguousarray(args, np.int64), flat, offs, size,
                          self._mult[:self.L])

    def _arg_chunks(self, k, lo, hi):
        """Index tuples over [0,hi) with at least one entry in [lo,hi)."""
        per = max(1, _CHUNK_CELLS // max(self.L, 1))
        if k == 1:
            for s in range(lo, hi, per):
                yield np.arange(s, min(hi, s + per), dtype=np.int64)[:, None]
        elif k == 2:
            allidx = np.arange(hi, dtype=np.int64)
            rows_per = max(1, per // max(hi, 1))
            for s in range(lo, hi, rows_per):
                new = np.arange(s, min(hi, s + rows_per), dtype=np.int64)
                a = np.repeat(new, hi)
                b = np.tile(allidx, len(new))
                yield np.stack([a, b], axis=1)
                # old x new
                if lo > 0:
                    a = np.repeat(np.arange(lo, dtype=np.int64), len(new))
                    b = np.tile(new, lo)
                    yield np.stack([a, b], axis=1)
        else:
            buf = []
            for tup in itertools.product(range(hi), repeat=k):
                if max(tup) >= lo:
                    buf.append(tup)
                    if len(buf) >= per:
                        yield np.array(buf, np.int64)
                        buf = []
            if buf:
                yield np.array(buf, np.int64)

    def _fresh_chunks(self, name, k, lo, hi):
        if k != 2:
            yield from self._arg_chunks(k, lo, hi)
            return
        flat, offs, size = self._op_tabs[name]
        sym = all((np.asarray(A.tables[name]) == np.asarray(A.tables[name]).T).all()
                  for A, _ in self.blocks)
        a, b, _ = fresh_binary(self.vecs, lo, hi, flat, offs, size, self._mult[:self.L],
                               self._keys, self._vals, sym)
        per = max(1, _CHUNK_CELLS // max(self.L, 1))
        args = np.stack([a, b], axis=1)
        for s in range(0, len(args), per):
            yield args[s:s + per]

    def next_round(self):
        if self.complete:
            return False
        if self.capped:
            raise CapExceeded("free algebra size", self.cap)
        lo, hi = self.rounds[-1]
        if lo == hi:
            self.complete = True
            return False
        sizes = np.array(self.sizes, np.int64)
        best = {}   # hash -> (size, op_id, args tuple, row)
        for op_id, (name, k) in enumerate(self.ops):
            for args in self._fresh_chunks(name, k, lo, hi):
                rows, hs = self._apply_hash(name, args)
                if k != 2:
                    fresh = ~self._known_mask(rows, hs)
                    if not fresh.any():
                        continue
                    rows, hs, args = rows[fresh], hs[fresh], args[fresh]
                csize = 1 + sizes[args].sum(axis=1)
                # primary key hash, then term size, then argument indices
                order = np.lexsort(tuple([args[:, j] for j in range(k - 1, -1, -1)] + [csize, hs]))
                hs_s = hs[order]
                first = np.ones(len(order), bool)
                first[1:] = hs_s[1:] != hs_s[:-1]
                grp = np.cumsum(first) - 1
                reps = order[first]
                if not (rows[order] == rows[reps][grp]).all():
                    self._merge_slow(best, rows, hs, csize, args, op_id)
                    continue
                for r in reps:
                    key = int(hs[r])
                    cand = (int(csize[r]), op_id, tuple(int(v) for v in args[r]))
                    cur = best.get(key)
                    if cur is None:
                        best[key] = cand + (rows[r].copy(),)
                    elif not np.array_equal(cur[3], rows[r]):
                        self._merge_slow(best, rows[r:r + 1], hs[r:r + 1], csize[r:r + 1],
                                         args[r:r + 1], op_id)
                    elif cand < cur[:3]:
                        best[key] = cand + (cur[3],)
        entries = []
        for key, val in best.items():
            if isinstance(val, list):
                entries.extend(val)
            else:
                entries.append(val)
        entries.sort(key=lambda e: e[:3])
        start = self.N
        room = self.cap - self.N
        if len(entries) > room:
            entries = entries[:max(room, 0)]
            self.capped = True
        for size, op_id, args, row in entries:
            name = self.ops[op_id][0]
            self._append(row, self._hash_rows(row[None, :])[0], ("app", name, args), size)
        self.rounds.append((start, self.N))
        if start == self.N and not self.capped:
            self.complete = True
        return True

    def _merge_slow(self, best, rows, hs, csize, args, op_id):
        # exact path for hash collisions: buckets hold lists of candidates
        for r in range(len(rows)):
            key = int(hs[r])
            cand = (int(csize[r]), op_id, tuple(int(v) for v in args[r]), rows[r].copy())
            cur = best.get(key)
            if cur is None:
                best[key] = [cand]
                continue
            if not isinstance(cur, list):
                cur = [cur]
                best[key] = cur
            for i, e in enumerate(cur):
                if np.array_equal(e[3], cand[3]):
                    if cand[:3] < e[:3]:
                        cur[i] = cand
                    break
            else:
                cur.append(cand)

    # ------------------------------------------------------------- access
    def ensure(self, count):
        while self.N < count and not self.complete:
            if self.capped:
                raise CapExceeded("free algebra size", self.cap)
            self.next_round()
        return self.N >= count

    def find(self, row):
        """Index of ``row``, extending lazily; None if it is not an element."""
        while True:
            idx = self.lookup(row)
            if idx is not None:
                return idx
            if self.complete:
                return None
            self.next_round()

    def build(self):
        while not self.complete:
            self.next_round()
        return self.N

    def term(self, idx):
        t = self._terms.get(idx)
        if t is not None:
            return t
        stack = [idx]
        while stack:
            i = stack[-1]
            if i in self._terms:
                stack.pop()
                continue
            p = self.prov[i]
            if p[0] == "var":
                self._terms[i] = Var(p[1])
                stack.pop()
            elif p[0] == "const":
                self._terms[i] = App(p[1])
                stack.pop()
            else:
                missing = [a for a in p[2] if a not in self._terms]
                if missing:
                    stack.extend(missing)
                else:
                    self._terms[i] = App(p[1], [self._terms[a] for a in p[2]])
                    stack.pop()
        return self._terms[idx]


class FreeAlgebra:
    """F_n of Var(K), enumerated lazily by breadth-first closure.

    Elements are evaluation vectors over all assignments of x1..xn into every
    generator (generator order, then mixed-radix with x1 most significant).
    Index 0 is always the constant 1.
    """

    def __init__(self, context, n, cap=None):
        self.context = context
        self.n = n
        cap = context.caps["max_free_size"] if cap is None else cap
        blocks = [(A, assignment_columns(A.size, n)) for A in context.generators]
        self.closure = Closure(context.signature, blocks, n, cap)
        self._algebra = None
        self._tables = {}

    # lazily extended views
    @property
    def complete(self):
        return self.closure.complete

    def build(self):
        self.closure.build()
        return self

    @property
    def size(self):
        return self.closure.build()

    def __len__(self):
        return self.size

    @property
    def vectors(self):
        self.closure.build()
        return self.closure.vecs[:self.closure.N]

    def vector(self, idx):
        if not self.closure.ensure(idx + 1):
            raise IndexError(idx)
        return self.closure.vecs[idx]

    def known(self):
        return self.closure.N

    @property
    def generator_elements(self):
        return list(self.closure.var_elements)

    def rep_term(self, idx):
        return self.closure.term(idx)

    @property
    def rep_terms(self):
        return [self.rep_term(i) for i in range(self.size)]

    def index_of(self, vec):
        return self.closure.find(np.asarray(vec, np.uint8))

    def element_of(self, term):
        return self.index_of(self.context.vector(term, self.n))

    def constants(self):
        """Indices of the values of closed terms (the image of F_0)."""
        F0 = self.context.free(0)
        out = []
        for j in range(F0.size):
            vec = self.context.apply(F0.vectors[j], [], 0, self.n)
            out.append(self.index_of(vec))
        return out

    def algebra(self):
        """The FiniteAlgebra view with tables induced coordinatewise."""
        if self._algebra is None:
            vecs = self.vectors
            cl = self.closure
            N = cl.N
            hk = cl.hashes[:N]
            order = np.argsort(hk, kind="stable")
            sh = hk[order]
            tables = {}
            for name, k in self.context.signature.operations:
                if k == 0:
                    tables[name] = np.array(cl.lookup(self._const_vec(name)))
                    continue
                res = np.empty((N,) * k, np.int64)
                for prefix in itertools.product(range(N), repeat=k - 1):
                    args = np.empty((N, k), np.int64)
                    for j, p in enumerate(prefix):
                        args[:, j] = p
                    args[:, k - 1] = np.arange(N)
                    rows = cl._apply(name, args)
                    hs = cl._hash_rows(rows)
                    pos = np.searchsorted(sh, hs)
                    pos[pos >= N] = N - 1
                    idx = order[pos]
                    ok = (sh[pos] == hs) & (vecs[idx] == rows).all(axis=1)
                    for r in np.nonzero(~ok)[0]:
                        idx[r] = cl.lookup(rows[r])
                    res[prefix] = idx
                tables[name] = res
            names = [self._short(i) for i in range(N)]
            self._algebra = FiniteAlgebra(N, 0, tables, signature=self.context.signature,
                                          names=names, label=f"F_{self.n}")
        return self._algebra

    def op_table(self, name):
        """Index table of a unary or binary basic operation on F_n.

        Kept compact (int16 when it fits); large tables are what the
        homomorphism checks against F_n need, so they are cached.
        """
        key = ("optab", name)
        tab = self._tables.get(key)
        if tab is not None:
            return tab
        cl = self.closure
        N = self.size
        k = self.context.signature.arity(name)
        dt = np.int16 if N < 2 ** 15 else np.int32
        if k == 1:
            j = cl.lookup_many(cl._apply(name, np.arange(N, dtype=np.int64)[:, None]))
            tab = j.astype(dt)
        elif k == 2:
            flat, offs, size = cl._op_tabs[name]
            sym = all((np.asarray(A.tables[name]) == np.asarray(A.tables[name]).T).all()
                      for A, _ in cl.blocks)
            tab = np.empty((N, N), dt)
            binary_op_table(cl.vecs, N, flat, offs, size, cl._mult[:cl.L], cl._keys,
                            cl._vals, sym, tab)
        else:
            raise ValueError("only unary and binary operations are tabulated")
        if (tab < 0).any():
            raise RuntimeError("free algebra is not closed under " + name)
        self._tables[key] = tab
        return tab

    def depth_classes(self, depth):
        """Number of elements named by terms of depth at most ``depth``;
        they are the first elements in enumeration order."""
        cl = self.closure
        while len(cl.rounds) <= depth and not cl.complete:
            cl.next_round()
        if cl.capped:
            raise CapExceeded("free algebra size", cl.cap)
        if len(cl.rounds) > depth:
            return cl.rounds[depth][1]
        return cl.N

    def constant_index(self, name):
        return self.index_of(self._const_vec(name))

    def _const_vec(self, name):
        return np.concatenate([np.full(cols.shape[1], int(A.tables[name]), np.uint8)
                               for A, cols in self.closure.blocks]) if self.closure.blocks \
            else np.zeros(0, np.uint8)

    def _short(self, i):
        from ..terms import format_term
        return format_term(self.rep_term(i), self.context.signature, shorthand=True)
