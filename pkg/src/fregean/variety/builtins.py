"""Built-in contexts and the JSON context loader."""
from __future__ import annotations

import itertools
import json
import os

import numpy as np

from ..algebra import FiniteAlgebra
from ..errors import InvalidContext
from ..terms import Signature
from .context import VarietyContext

HEYTING_EQUIV = "m(i(x1,x2),i(x2,x1))"


def _table(n, arity, f):
    return np.array([f(*a) for a in itertools.product(range(n), repeat=arity)],
                    np.int64).reshape((n,) * arity)


def chain_ops(n):
    """Heyting operations on the chain 0 < 1 < ... < n-1."""
    top = n - 1
    return {
        "i": _table(n, 2, lambda a, b: top if a <= b else b),
        "m": _table(n, 2, min),
        "j": _table(n, 2, max),
        "e": _table(n, 2, lambda a, b: top if a == b else min(a, b)),
        "0": np.array(0),
        "1": np.array(top),
    }


def _chain_names(n):
    if n == 2:
        return ["0", "1"]
    if n == 3:
        return ["0", "a", "1"]
    return ["0"] + [f"a{i}" for i in range(1, n - 1)] + ["1"]


def _reduct(n, sig, label):
    ops = chain_ops(n)
    tables = {name: ops[name] for name, _ in sig.operations}
    return FiniteAlgebra(n, n - 1, tables, signature=sig, names=_chain_names(n), label=label)


def h5_algebra(sig):
    """The Heyting algebra 2^2 (+) 1: 0 < a, b < c < 1 with b = not a."""
    order = {(0, x) for x in range(5)} | {(x, x) for x in range(5)} | \
        {(1, 3), (2, 3), (1, 4), (2, 4), (3, 4)}

    def leq(x, y):
        return (x, y) in order

    def meet(x, y):
        lows = [z for z in range(5) if leq(z, x) and leq(z, y)]
        return next(z for z in lows if all(leq(w, z) for w in lows))

    def join(x, y):
        ups = [z for z in range(5) if leq(x, z) and leq(y, z)]
        return next(z for z in ups if all(leq(z, w) for w in ups))

    def imp(x, y):
        cands = [z for z in range(5) if leq(meet(z, x), y)]
        return next(z for z in cands if all(leq(w, z) for w in cands))

    tables = {"i": _table(5, 2, imp), "m": _table(5, 2, meet), "j": _table(5, 2, join),
              "0": np.array(0), "1": np.array(4)}
    tables = {name: tables[name] for name, _ in sig.operations}
    return FiniteAlgebra(5, 4, tables, signature=sig, names=["0", "a", "b", "c", "1"], label="H5")


def heyting_signature():
    return Signature([("i", 2), ("m", 2), ("j", 2), ("0", 0), ("1", 0)],
                     derived={"e": (2, HEYTING_EQUIV)}, equiv_symbol="e",
                     subtractive_symbol="i")


def boolean_group():
    sig = Signature([("e", 2), ("1", 0)], equiv_symbol="e", subtractive_symbol="e")
    B2 = _reduct(2, sig, "B2")
    return VarietyContext("boolean-group", sig, [B2], equiv_term="e(x1,x2)",
                          subtractive_term="e(x1,x2)",
                          description="Boolean groups: the 2-element equivalential algebra")


def equiv():
    sig = Signature([("e", 2), ("1", 0)], equiv_symbol="e", subtractive_symbol="e")
    return VarietyContext("equiv", sig, [_reduct(2, sig, "E2"), _reduct(3, sig, "E3")],
                          equiv_term="e(x1,x2)", subtractive_term="e(x1,x2)",
                          description="equivalential algebras generated by the 2- and 3-element "
                                      "subdirectly irreducible ones")


def equiv0():
    sig = Signature([("e", 2), ("0", 0), ("1", 0)], equiv_symbol="e", subtractive_symbol="e")
    return VarietyContext("equiv0", sig, [_reduct(2, sig, "E2_0"), _reduct(3, sig, "E3_0")],
                          equiv_term="e(x1,x2)", subtractive_term="e(x1,x2)",
                          description="equivalential algebras with 0, generated by the 2- and "
                                      "3-element chains")


def brouwerian():
    sig = Signature([("i", 2), ("m", 2), ("1", 0)], derived={"e": (2, HEYTING_EQUIV)},
                    equiv_symbol="e", subtractive_symbol="i")
    return VarietyContext("brouwerian", sig, [_reduct(3, sig, "BS3")],
                          equiv_term="e(x1,x2)", subtractive_term="i(x1,x2)",
                          description="Brouwerian semilattices generated by the 3-element chain")


def goedel3():
    sig = heyting_signature()
    return VarietyContext("goedel3", sig, [_reduct(3, sig, "G3")],
                          equiv_term="e(x1,x2)", subtractive_term="i(x1,x2)",
                          description="Heyting algebras generated by the 3-element Goedel chain")


def heyting_h5():
    sig = heyting_signature()
    return VarietyContext("heyting-h5", sig, [h5_algebra(sig)],
                          equiv_term="e(x1,x2)", subtractive_term="i(x1,x2)",
                          description="Heyting algebras generated by 2^2 (+) 1")


def hilbert0_h():
    sig = Signature([("i", 2), ("0", 0), ("1", 0)], subtractive_symbol="i")
    return VarietyContext("hilbert0-h", sig, [_reduct(3, sig, "HI3")],
                          subtractive_term="i(x1,x2)",
                          description="bounded Hilbert algebras: the implication-and-0 reduct "
                                      "of the 3-element Heyting chain")


BUILTINS = {
    "boolean-group": boolean_group,
    "equiv": equiv,
    "equiv0": equiv0,
    "brouwerian": brouwerian,
    "goedel3": goedel3,
    "heyting-h5": heyting_h5,
    "hilbert0-h": hilbert0_h,
}

_loaded = {}


def builtin_context(name, fresh=False):
    if name not in BUILTINS:
        raise KeyError(f"unknown built-in context {name!r}; choose from {', '.join(BUILTINS)}")
    if fresh:
        return BUILTINS[name]()
    if name not in _loaded:
        _loaded[name] = BUILTINS[name]()
    return _loaded[name]


def load_context(path_or_name, caps=None):
    """A built-in name or a JSON context file.

    The file holds ``{"signature": {...}, "generators": [...], "equiv_term":
    ..., "subtractive_term": ..., "caps": {...}}``; each generator is either
    an inline algebra object or a path relative to the context file.
    """
    if path_or_name in BUILTINS and not os.path.exists(path_or_name):
        ctx = builtin_context(path_or_name, fresh=bool(caps))
        if caps:
            ctx.caps.update(caps)
        return ctx
    try:
        with open(path_or_name, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, ValueError) as exc:
        raise InvalidContext(f"cannot read context {path_or_name!r}: {exc}") from exc
    base = os.path.dirname(os.path.abspath(path_or_name))
    try:
        sig = Signature.from_json(data["signature"])
        gens = []
        for k, g in enumerate(data["generators"]):
            if isinstance(g, str):
                with open(os.path.join(base, g), encoding="utf-8") as fh:
                    g = json.load(fh)
            A = FiniteAlgebra.from_json(g, signature=sig)
            A.label = g.get("label") or f"G{k}"
            gens.append(A)
        all_caps = dict(data.get("caps") or {})
        all_caps.update(caps or {})
        name = data.get("name") or os.path.splitext(os.path.basename(path_or_name))[0]
        return VarietyContext(name, sig, gens, equiv_term=data.get("equiv_term"),
                              subtractive_term=data.get("subtractive_term"), caps=all_caps,
                              description=data.get("description", ""))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidContext(f"malformed context {path_or_name!r}: {exc}") from exc
