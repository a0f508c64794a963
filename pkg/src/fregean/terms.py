"""Terms over a finite signature: construction, parsing, printing, substitution.

Terms are hash-consed: structurally equal terms are the same object, so
equality and hashing are O(1) and large terms produced by repeated
substitution are stored as DAGs.  Nothing in the public behaviour depends
on the sharing.
"""
from __future__ import annotations

import re
import weakref

from .errors import ArityMismatch, TermSyntaxError, UnknownSymbol

__all__ = [
    "Term", "Var", "App", "Signature", "var", "parse_term", "format_term",
    "substitute", "compose", "variables", "term_size", "term_depth",
    "max_var",
]


class Term:
    __slots__ = ()

    def __repr__(self):
        return f"<Term {format_term(self)}>"


class Var(Term):
    __slots__ = ("index", "_hash", "__weakref__")
    _cache: "weakref.WeakValueDictionary[int, Var]" = weakref.WeakValueDictionary()

    def __new__(cls, index):
        index = int(index)
        if index < 0:
            raise ValueError("variable index must be nonnegative")
        obj = cls._cache.get(index)
        if obj is None:
            obj = object.__new__(cls)
            obj.index = index
            obj._hash = hash(("var", index))
            cls._cache[index] = obj
        return obj

    def __hash__(self):
        return self._hash

    def __reduce__(self):
        return (Var, (self.index,))


class App(Term):
    __slots__ = ("op", "args", "_hash", "__weakref__")
    _cache: "weakref.WeakValueDictionary[tuple, App]" = weakref.WeakValueDictionary()

    def __new__(cls, op, args=()):
        args = tuple(args)
        key = (op, args)
        obj = cls._cache.get(key)
        if obj is None:
            for a in args:
                if not isinstance(a, Term):
                    raise TypeError(f"argument {a!r} is not a Term")
            obj = object.__new__(cls)
            obj.op = op
            obj.args = args
            obj._hash = hash(key)
            cls._cache[key] = obj
        return obj

    def __hash__(self):
        return self._hash

    def __reduce__(self):
        return (App, (self.op, self.args))


def var(i):
    return Var(i)


class Signature:
    """Operation symbols with arities, the constant 1, and designated terms.

    ``derived`` maps a name to ``(arity, definition)`` where the definition is
    a term (or its text) over x1..x_arity; derived symbols may be used in
    terms like basic ones and are expanded only during evaluation.
    """

    def __init__(self, operations, constant_one="1", equiv_symbol=None,
                 subtractive_symbol=None, derived=None):
        self.operations = [(str(n), int(k)) for n, k in operations]
        self.derived = {}
        self._arity = {}
        for name, k in self.operations:
            if name in self._arity:
                raise ValueError(f"duplicate operation {name!r}")
            if k < 0:
                raise ValueError(f"negative arity for {name!r}")
            self._arity[name] = k
        if self._arity.get(constant_one) != 0:
            raise ValueError(f"constant_one {constant_one!r} is not a declared constant")
        self.constant_one = constant_one
        for name, (k, definition) in (derived or {}).items():
            self.add_derived(name, k, definition)
        for sym in (equiv_symbol, subtractive_symbol):
            if sym is not None and self._arity.get(sym) != 2:
                raise ValueError(f"designated symbol {sym!r} must be a binary operation")
        self.equiv_symbol = equiv_symbol
        self.subtractive_symbol = subtractive_symbol

    def add_derived(self, name, arity, definition):
        if name in self._arity:
            raise ValueError(f"duplicate operation {name!r}")
        if isinstance(definition, str):
            definition = parse_term(definition, self)
        vs = variables(definition)
        if vs and vs[-1] > arity:
            raise ValueError(f"definition of {name!r} uses x{vs[-1]} beyond its arity")
        self._arity[name] = int(arity)
        self.derived[name] = (int(arity), definition)

    @property
    def basic_names(self):
        return [n for n, _ in self.operations]

    @property
    def names(self):
        return list(self._arity)

    def arity(self, name):
        try:
            return self._arity[name]
        except KeyError:
            raise UnknownSymbol(name) from None

    def has(self, name):
        return name in self._arity

    def is_derived(self, name):
        return name in self.derived

    def constants(self):
        return [n for n, k in self.operations if k == 0]

    def one(self):
        return App(self.constant_one)

    def to_json(self):
        d = {"operations": [[n, k] for n, k in self.operations],
             "one": self.constant_one}
        if self.derived:
            d["derived"] = {n: [k, format_term(t)] for n, (k, t) in self.derived.items()}
        if self.equiv_symbol:
            d["equiv_symbol"] = self.equiv_symbol
        if self.subtractive_symbol:
            d["subtractive_symbol"] = self.subtractive_symbol
        return d

    @classmethod
    def from_json(cls, d):
        ops = d["operations"]
        if isinstance(ops, dict):
            ops = list(ops.items())
        else:
            ops = [(o["name"], o["arity"]) if isinstance(o, dict) else tuple(o) for o in ops]
        sig = cls(ops, constant_one=d.get("one", "1"))
        for name, spec in (d.get("derived") or {}).items():
            k, text = spec
            sig.add_derived(name, k, text)
        for key in ("equiv_symbol", "subtractive_symbol"):
            sym = d.get(key)
            if sym is not None and sig._arity.get(sym) != 2:
                raise ValueError(f"designated symbol {sym!r} must be binary")
        sig.equiv_symbol = d.get("equiv_symbol")
        sig.subtractive_symbol = d.get("subtractive_symbol")
        return sig


# ---------------------------------------------------------------- traversal

def _postorder(t):
    """Distinct subterms of ``t`` in post-order (children before parents)."""
    seen = set()
    out = []
    stack = [(t, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            out.append(node)
            continue
        if node in seen:
            continue
        seen.add(node)
        stack.append((node, True))
        if isinstance(node, App):
            for a in reversed(node.args):
                if a not in seen:
                    stack.append((a, False))
    return out


def variables(t):
    return sorted({s.index for s in _postorder(t) if isinstance(s, Var)})


def max_var(t):
    vs = variables(t)
    return vs[-1] if vs else 0


def term_size(t):
    """Number of nodes of ``t`` viewed as a tree (may be huge for DAGs)."""
    size = {}
    for s in _postorder(t):
        size[s] = 1 if isinstance(s, Var) else 1 + sum(size[a] for a in s.args)
    return size[t]


def term_depth(t):
    depth = {}
    for s in _postorder(t):
        depth[s] = 0 if isinstance(s, Var) or not s.args else 1 + max(depth[a] for a in s.args)
    return depth[t]


def substitute(t, sigma):
    """Simultaneously replace variables by ``sigma[index]``; others stay fixed."""
    if not sigma:
        return t
    memo = {}
    for s in _postorder(t):
        if isinstance(s, Var):
            memo[s] = sigma.get(s.index, s)
        elif not s.args:
            memo[s] = s
        else:
            memo[s] = App(s.op, [memo[a] for a in s.args])
    return memo[t]


def compose(tau, sigma):
    """The substitution x -> substitute(sigma(x), tau), i.e. tau after sigma."""
    out = {i: substitute(u, tau) for i, u in sigma.items()}
    for i, u in tau.items():
        out.setdefault(i, u)
    return out


# ------------------------------------------------------------------ printing

def format_term(t, sig=None, shorthand=False):
    """Print ``t``.  The explicit form is ``f(t1,...,tk)``; with ``shorthand``
    and a signature declaring ``equiv_symbol`` the equivalence is written by
    juxtaposition, associating to the left (``x1 x2 (x1 x3)``)."""
    eq = sig.equiv_symbol if (shorthand and sig is not None) else None
    text = {}
    chain = {}      # text of an eq-node printed without outer parentheses
    for s in _postorder(t):
        if isinstance(s, Var):
            text[s] = f"x{s.index}"
        elif not s.args:
            text[s] = s.op
        elif s.op == eq:
            left, right = s.args
            lt = chain.get(left, text[left])
            rt = f"({chain[right]})" if right in chain else text[right]
            chain[s] = f"{lt} {rt}"
            text[s] = f"({chain[s]})"
        else:
            parts = [chain.get(a, text[a]) for a in s.args]
            text[s] = f"{s.op}({','.join(parts)})"
    return chain.get(t, text[t])


# ------------------------------------------------------------------- parsing

_VAR_RE = re.compile(r"x(\d+)")
_LETTER_VARS = {"x": 1, "y": 2, "z": 3}


def _tokenize(text, sig):
    names = sorted(sig.names, key=len, reverse=True)
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        if ch in "(),":
            toks.append((ch, ch, pos))
            pos += 1
            continue
        m = _VAR_RE.match(text, pos)
        if m:
            toks.append(("var", int(m.group(1)), pos))
            pos = m.end()
            continue
        for name in names:
            if text.startswith(name, pos):
                toks.append(("name", name, pos))
                pos += len(name)
                break
        else:
            if ch in _LETTER_VARS:
                toks.append(("var", _LETTER_VARS[ch], pos))
                pos += 1
                continue
            m = re.compile(r"[^\s(),]+").match(text, pos)
            raise UnknownSymbol(m.group(0), _byte_offset(text, pos))
    toks.append(("end", None, n))
    return toks


def _byte_offset(text, pos):
    return len(text[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, text, sig):
        self.text = text
        self.sig = sig
        self.toks = _tokenize(text, sig)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        raise TermSyntaxError(msg, _byte_offset(self.text, tok[2]))

    def starts_atom(self, tok):
        return tok[0] in ("var", "name", "(")

    def expr(self):
        t = self.atom()
        while self.starts_atom(self.peek()):
            if self.sig.equiv_symbol is None:
                self.error("juxtaposition needs a designated equivalence symbol")
            t = App(self.sig.equiv_symbol, [t, self.atom()])
        return t

    def atom(self):
        tok = self.take()
        kind, val, _ = tok
        if kind == "var":
            return Var(val)
        if kind == "(":
            t = self.expr()
            if self.take()[0] != ")":
                self.error("expected ')'", self.toks[self.i - 1])
            return t
        if kind == "name":
            k = self.sig.arity(val)
            offset = _byte_offset(self.text, tok[2])
            if self.peek()[0] == "(" and (k > 0 or self.toks[self.i + 1][0] == ")"):
                self.take()
                args = []
                if self.peek()[0] != ")":
                    args.append(self.expr())
                    while self.peek()[0] == ",":
                        self.take()
                        args.append(self.expr())
                if self.take()[0] != ")":
                    self.error("expected ')' or ','", self.toks[self.i - 1])
                if len(args) != k:
                    raise ArityMismatch(val, k, len(args), offset)
                return App(val, args)
            if k != 0:
                raise ArityMismatch(val, k, 0, offset)
            return App(val)
        if kind == "end":
            self.error("unexpected end of input", tok)
        self.error(f"unexpected {val!r}", tok)


def parse_term(text, sig):
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    p = _Parser(text, sig)
    if p.peek()[0] == "end":
        p.error("empty term")
    t = p.expr()
    if p.peek()[0] != "end":
        p.error(f"unexpected {p.peek()[1]!r}")
    return t
