"""Command line front end: ``fregean check | unify | solve | free | certify``.

Exit codes: 0 success, 1 a check failed or the problem is not unifiable,
2 the context, term or input file could not be loaded, 3 a cap was hit or
a precondition failed.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .errors import (CapExceeded, ConditionThreeFailed, InvalidContext, NoDesignatedTerm,
                     NotUnifiable, PreconditionFailed)
from .terms import TermSyntaxError, format_term, max_var

EXIT_OK, EXIT_FAIL, EXIT_LOAD, EXIT_PRECONDITION = 0, 1, 2, 3


class Report:
    """What a command found; rendered as text or JSON."""

    def __init__(self, command, V=None):
        self.command = command
        self.context = {"name": V.name, "hash": V.fingerprint()} if V is not None else None
        self.verdicts = []
        self.certificates = []
        self.info = {}
        self.timing = {}
        self._t = time.perf_counter()

    def verdict(self, check, ok, witness=None, **extra):
        d = {"check": check, "pass": bool(ok)}
        if not ok:
            d["witness"] = witness if witness is not None else "see info"
        d.update(extra)
        self.verdicts.append(d)
        return ok

    def phase(self, name):
        now = time.perf_counter()
        self.timing[name] = round(1000 * (now - self._t), 1)
        self._t = now

    def exit_code(self):
        return EXIT_OK if all(v["pass"] for v in self.verdicts) else EXIT_FAIL

    def to_json(self, timing=False):
        d = {"command": self.command, "context": self.context, "verdicts": self.verdicts,
             "certificates": self.certificates}
        d.update(self.info)
        if timing:
            d["timing_ms"] = self.timing
        return d


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def _load(args):
    from .variety import load_context
    name = args.context
    if name is None:
        raise InvalidContext("no context given")
    caps = {"max_free_size": args.cap_free} if args.cap_free else None
    return load_context(name, caps=caps)


# ------------------------------------------------------------------ commands

def cmd_check(V, args):
    from .variety import (check_variety_identities, find_malcev_element, fregean_diagnostics,
                          si_members_check, validate_equivalence_term, validate_subtractive_term)
    rep = Report("check", V)
    if V.equiv_term is not None:
        ok, wit = validate_equivalence_term(V)
        rep.verdict("equivalence term", ok, wit)
    if V.subtractive_term is not None:
        ok, wit = validate_subtractive_term(V)
        rep.verdict("subtractive term", ok, wit)
    rep.phase("terms")
    diag = fregean_diagnostics(V, args.fregean_bound)
    bad = [e for e in diag["entries"] if not (e["one_regular"] and e["congruence_orderable"])]
    rep.verdict("fregean diagnostics", diag["ok"], bad[0] if bad else None,
                checked=len(diag["entries"]))
    rep.phase("fregean")
    m = find_malcev_element(V)
    rep.info["malcev_term"] = format_term(m, V.signature) if m is not None else None
    rep.info["congruence_permutable"] = m is not None
    rep.phase("malcev")
    if V.equiv_term is not None:
        ids = check_variety_identities(V)
        wit = next(({"operation": k, **v["witness"]} for k, v in ids["operations"].items()
                     if not v["holds"]), None)
        rep.verdict("chi identities", ids["holds"], wit, members=ids["members"])
    rep.phase("identities")
    si = si_members_check(V, args.si_bound)
    rep.verdict("si members", si["ok"], si["offenders"][:1] or None, sources=si["sources"])
    rep.phase("si members")
    return rep, rep.exit_code()


def cmd_unify(V, args):
    from .synthesis import synthesize_cp, synthesize_subtractive, synthesize_unifier_height
    from .unification import (brute_force_projective_unifier, brute_force_unifier,
                              check_unif_conditions, ground_unifiable, verify_certificate,
                              verify_mgu_reproductive)
    t = V.parse(args.term)
    n = max_var(t)
    rep = Report("unify", V)
    rep.info["term"] = format_term(t, V.signature)
    ground = ground_unifiable(V, t, n)
    unifiable = ground is not None
    rep.info["unifiable"] = unifiable
    rep.info["ground_unifier"] = None if ground is None else \
        [format_term(u, V.signature) for u in ground["terms"]]
    rep.phase("ground")
    try:
        conds = check_unif_conditions(V, t, n)
        rep.info["conditions"] = conds
    except (NoDesignatedTerm, CapExceeded) as exc:
        rep.info["conditions"] = {"error": str(exc)}
    rep.phase("conditions")
    if not unifiable:
        return rep, EXIT_FAIL
    method = args.method
    if method == "auto":
        if args.projective:
            method = "cp" if V.equiv_term is not None else "subtractive"
        else:
            method = "brute"
    trace = None
    if method == "cp":
        cert, trace = synthesize_cp(V, t, n)
    elif method == "subtractive":
        cert, trace = synthesize_subtractive(V, t, n)
    elif method == "height":
        cert, trace = synthesize_unifier_height(V, t, n)
    elif args.projective:
        cert = brute_force_projective_unifier(V, t, n)
    else:
        cert = brute_force_unifier(V, t, n)
    rep.phase("unifier")
    if cert is None:
        rep.verdict("projective unifier found", False, "search exhausted")
        return rep, EXIT_FAIL
    ok, vrep = verify_certificate(V, cert)
    cert.verified = ok
    rep.verdict("certificate verified", ok, vrep["failures"][:1] or None)
    rep.certificates.append(cert.to_json(V.signature))
    if trace is not None:
        rep.info["trace"] = trace.to_json(V.signature)
    if args.verify_mgu is not None:
        good, mrep = verify_mgu_reproductive(V, t, cert, args.verify_mgu)
        rep.verdict("reproductive", good, mrep["counterexample"], checked_k=mrep["checked_k"])
    rep.phase("verify")
    return rep, rep.exit_code()


def cmd_solve(V, args):
    from .unification import solve_system, verify_certificate
    with open(args.equations, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list) or not all(isinstance(e, list) and len(e) == 2 for e in data):
        raise InvalidContext("the equations file must hold a list of [s, t] pairs")
    eqs = [(V.parse(a), V.parse(b)) for a, b in data]
    rep = Report("solve", V)
    rep.info["equations"] = [[format_term(a, V.signature), format_term(b, V.signature)]
                             for a, b in eqs]
    cert = solve_system(V, eqs)
    ok, vrep = verify_certificate(V, cert)
    rep.verdict("certificate verified", ok and cert.verified, vrep["failures"][:1] or None)
    rep.certificates.append(cert.to_json(V.signature))
    rep.phase("solve")
    return rep, rep.exit_code()


def cmd_free(V, args):
    n = args.n
    F = V.free(n).build()
    rep = Report("free", V)
    rep.info["n"] = n
    rep.info["size"] = F.size
    rep.phase("closure")
    if args.elements or args.table:
        rep.info["elements"] = [format_term(F.rep_term(i), V.signature) for i in range(F.size)]
    if args.table:
        A = F.algebra()
        rep.info["tables"] = {name: np.asarray(A.table(name)).tolist()
                              for name, _ in V.signature.operations}
    if args.fm:
        view = V.si_view(n)
        entries = []
        for e in range(len(view)):
            d = view.describe(e)
            d["star"] = view.quotient_algebra(e).name_of(int(view.star[e])) \
                if view.star[e] >= 0 else None
            entries.append(d)
        rep.info["meet_irreducibles"] = entries
        rep.info["meet_irreducibles_exact"] = bool(view.exact)
        rep.info["meet_irreducibles_basis"] = view.basis
        if n >= 1:
            prev = V.free(n - 1).size
            big = [d["quotient_size"] for d in entries if d["quotient_size"] > 2]
            rep.verdict("quotient size bound", all(q <= 1 + prev for q in big),
                        {"bound": 1 + prev, "largest": max(big, default=0)})
        rep.phase("meet irreducibles")
    return rep, rep.exit_code()


def cmd_certify(V, args):
    from .synthesis import idempotent_retraction
    from .unification import UnifierCertificate, verify_certificate, verify_mgu_reproductive
    with open(args.certificate, encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict) and data.get("certificates"):
        # a saved unify/solve report: take its certificate
        data = data["certificates"][0]
    if not isinstance(data, dict) or "tau" not in data:
        raise ValueError("not a certificate: expected an object with a 'tau' list")
    cert = UnifierCertificate.from_json(data, V.signature)
    rep = Report("certify", V)
    ok, vrep = verify_certificate(V, cert)
    rep.verdict("certificate verified", ok, vrep["failures"][:1] or None)
    if cert.kind == "projective" and ok:
        if args.verify_mgu is not None:
            good, mrep = verify_mgu_reproductive(V, cert.term, cert, args.verify_mgu)
            rep.verdict("reproductive", good, mrep["counterexample"], checked_k=mrep["checked_k"])
        rho, rrep = idempotent_retraction(V, cert.n, cert.tau, cert.terms)
        rep.info["retraction"] = {"power": rrep["power"],
                                  "terms": [format_term(u, V.signature) for u in rho["terms"]]}
        rep.verdict("idempotent retraction with kernel phi", rrep["kernel_equals_phi"],
                    rrep, exhaustive=rrep["exhaustive"])
    rep.certificates.append(cert.to_json(V.signature))
    rep.phase("certify")
    return rep, rep.exit_code()


COMMANDS = {"check": cmd_check, "unify": cmd_unify, "solve": cmd_solve, "free": cmd_free,
            "certify": cmd_certify}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--context", metavar="FILE|NAME",
                        help="context file or built-in name (instead of the positional one)")
    common.add_argument("--json", action="store_true", help="print the report as JSON")
    common.add_argument("--cap-free", type=int, default=None, metavar="N",
                        help="largest free algebra to enumerate")
    common.add_argument("--seed", type=int, default=None, help="reserved; has no effect")
    common.add_argument("--timing", action="store_true", help="include timings per phase")

    ap = argparse.ArgumentParser(prog="fregean", parents=[common],
                                 description="Unification in finitely generated Fregean varieties")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="run the structural checks")
    p.add_argument("context")
    p.add_argument("--fregean-bound", type=int, default=1, metavar="N")
    p.add_argument("--si-bound", type=int, default=2, metavar="N")

    p = sub.add_parser("unify", parents=[common], help="unify a matching problem t = 1")
    p.add_argument("context")
    p.add_argument("term")
    p.add_argument("--projective", action="store_true")
    p.add_argument("--verify-mgu", type=int, default=None, metavar="K")
    p.add_argument("--method", choices=["auto", "cp", "subtractive", "height", "brute"],
                   default="auto")

    p = sub.add_parser("solve", parents=[common], help="solve a system from a JSON file")
    p.add_argument("context")
    p.add_argument("equations")

    p = sub.add_parser("free", parents=[common], help="inspect a free algebra")
    p.add_argument("context")
    p.add_argument("n", type=int)
    p.add_argument("--fm", action="store_true", help="list the meet-irreducible filters")
    p.add_argument("--table", action="store_true", help="print operation tables")
    p.add_argument("--elements", action="store_true", help="print representative terms")

    p = sub.add_parser("certify", parents=[common], help="check a certificate file")
    p.add_argument("context")
    p.add_argument("certificate")
    p.add_argument("--verify-mgu", type=int, default=None, metavar="K")
    return ap


def _move_context(argv):
    """Rewrite ``--context X`` as the positional context after the command."""
    argv = list(argv)
    ctx = None
    out = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a == "--context" and i + 1 < len(argv):
            ctx = argv[i + 1]
            i += 2
            continue
        if a.startswith("--context="):
            ctx = a.split("=", 1)[1]
        else:
            out.append(a)
        i += 1
    if ctx is not None:
        for j, a in enumerate(out):
            if a in COMMANDS:
                out.insert(j + 1, ctx)
                break
    return out


def _render(rep, code, args):
    d = _jsonable(rep.to_json(args.timing))
    if args.json:
        print(json.dumps(d, indent=2, sort_keys=True, ensure_ascii=False))
        return
    ctx = d["context"]["name"] if d.get("context") else "-"
    print(f"{d['command']} [{ctx}]")
    for key in ("term", "n", "size", "unifiable", "ground_unifier", "malcev_term",
                "meet_irreducibles_exact"):
        if key in d:
            print(f"  {key}: {d[key]}")
    if "conditions" in d:
        c = d["conditions"]
        print(f"  cond3: {c.get('cond3')}  cond4: {c.get('cond4')}"
              + ("  (informational)" if c.get("informational") else ""))
    for v in d["verdicts"]:
        mark = "PASS" if v["pass"] else "FAIL"
        line = f"  {mark} {v['check']}"
        if not v["pass"]:
            line += f": {json.dumps(v.get('witness'), ensure_ascii=False)}"
        print(line)
    for c in d["certificates"]:
        print(f"  certificate ({c['kind']}, {c['provenance']}, verified={c['verified']}):")
        for i, u in enumerate(c["tau"], 1):
            print(f"    x{i} -> {u}")
    if "trace" in d:
        print(f"  trace: {len(d['trace']['steps'])} steps")
    if "meet_irreducibles" in d:
        for e in d["meet_irreducibles"]:
            print(f"    eta{e['id']}: |F/eta| = {e['quotient_size']}, star {e['star']}, "
                  f"x -> {e['images']}")
    if "elements" in d and "meet_irreducibles" not in d:
        for i, s in enumerate(d["elements"]):
            print(f"    {i}: {s}")
    if args.timing:
        print("  timing (ms): " + ", ".join(f"{k} {v}" for k, v in d["timing_ms"].items()))


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(_move_context(sys.argv[1:] if argv is None else argv))
    try:
        V = _load(args)
    except (InvalidContext, KeyError, OSError) as exc:
        return _fail(args, EXIT_LOAD, str(exc))
    try:
        rep, code = COMMANDS[args.command](V, args)
    except (TermSyntaxError, InvalidContext, OSError, ValueError) as exc:
        return _fail(args, EXIT_LOAD, str(exc))
    except NotUnifiable as exc:
        return _fail(args, EXIT_FAIL, str(exc), "NotUnifiable")
    except (PreconditionFailed, ConditionThreeFailed, NoDesignatedTerm) as exc:
        return _fail(args, EXIT_PRECONDITION, str(exc), type(exc).__name__,
                     getattr(exc, "condition", None))
    except CapExceeded as exc:
        return _fail(args, EXIT_PRECONDITION, str(exc), "CapExceeded")
    _render(rep, code, args)
    return code


def _fail(args, code, message, kind=None, condition=None):
    d = {"command": args.command, "error": message, "exit": code}
    if kind:
        d["kind"] = kind
    if condition:
        d["condition"] = condition
    if args.json:
        print(json.dumps(d, indent=2, sort_keys=True, ensure_ascii=False))
    else:
        print(f"{args.command}: {kind + ': ' if kind else ''}{message}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
