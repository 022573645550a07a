"""``stacklab`` command line.

Exit codes: 0 success, 1 verification failure, 2 input error, 3 precondition
or budget violation.  JSON goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from .actions import StackingCertificate, verify_certificate
from .enumerator import DEFAULT_BUDGET, DEFAULT_CAP, search_equations, sweep_audit
from .errors import InputError, PreconditionError, StacklabError
from .stacker import StackerConfig, build_stacking
from .surfaces import NormalFormSurface, audit
from .words import (AlternatingWord, SymbolTable, cyclic_reduce, format_inline, is_proper_power, parse_word,
                    prefixes, reduce, word_to_json)

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_PRECONDITION = 0, 1, 2, 3


class _Fail(Exception):
    def __init__(self, code: int, message: str, payload: dict | None = None):
        super().__init__(message)
        self.code = code
        self.payload = payload


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _word(text: str, symbols: SymbolTable) -> AlternatingWord:
    letters, _ = parse_word(text, symbols)
    return reduce(letters)


def _describe(word, symbols) -> dict:
    return {"inline": format_inline(word, symbols), "json": word_to_json(word)}


def _config(args) -> dict:
    return _load_json(args.config) if args.config else {}


def cmd_word(args) -> int:
    symbols = SymbolTable()
    letters, _ = parse_word(args.word, symbols)
    w = reduce(letters)
    if args.op == "reduce":
        kind = "identity" if w.is_identity else "factor_element" if len(w) == 1 else "alternating"
        out = {"kind": kind, "result": _describe(w, symbols)}
    elif args.op == "cyclic-reduce":
        core, conj = cyclic_reduce(w)
        out = {"word": _describe(core, symbols), "conjugator": _describe(conj, symbols)}
    elif args.op == "power":
        if not w.is_cyclic:
            raise PreconditionError(f"{format_inline(w, symbols)} is not cyclically reduced")
        pp = is_proper_power(w)
        out = ({"root": format_inline(pp[0], symbols), "k": pp[1]} if pp
               else {"root": None, "k": 1})
    else:
        out = {"prefixes": [{"index": i, "word": format_inline(p, symbols)} for i, p in prefixes(w)]}
    out["symbols"] = symbols.to_json()
    _emit(out)
    return EXIT_OK


def cmd_stack(args) -> int:
    cfg = StackerConfig.from_dict(_config(args))
    symbols = SymbolTable()
    w = _word(args.word, symbols)
    core, conj = cyclic_reduce(w)
    if not conj.is_identity:
        print(f"stacking the cyclic reduction {format_inline(core, symbols)}", file=sys.stderr)
    cert = build_stacking(core, cfg)
    check = verify_certificate(cert)
    if not check.ok:
        raise _Fail(EXIT_VERIFY, f"built certificate failed verification: {check.reason}")
    out = cert.to_json()
    out["symbols"] = symbols.to_json()
    out["conjugator"] = word_to_json(conj)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(out, fh, indent=2)
            fh.write("\n")
    _emit(out)
    return EXIT_OK


def cmd_verify(args) -> int:
    cert = StackingCertificate.from_json(_load_json(args.cert))
    check = verify_certificate(cert)
    _emit({"ok": check.ok, "reason": check.reason})
    if not check.ok:
        print(f"certificate rejected: {check.reason}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_audit(args) -> int:
    surface = NormalFormSurface.from_json(_load_json(args.surface))
    cert = StackingCertificate.from_json(_load_json(args.cert))
    check = verify_certificate(cert)
    if not check.ok:
        raise _Fail(EXIT_VERIFY, f"certificate rejected: {check.reason}")
    report = audit(surface, cert)
    _emit(report.to_json())
    return EXIT_OK


def cmd_sweep(args) -> int:
    conf = _config(args)
    cfg = StackerConfig.from_dict(conf)
    symbols = SymbolTable()
    w = _word(args.word, symbols)
    if args.cert:
        cert = StackingCertificate.from_json(_load_json(args.cert))
        if cert.word != w:
            raise InputError("certificate is for a different word")
        check = verify_certificate(cert)
        if not check.ok:
            raise _Fail(EXIT_VERIFY, f"certificate rejected: {check.reason}")
    else:
        cert = build_stacking(w, cfg)
    cap = int(args.cap if args.cap is not None else conf.get("cap", DEFAULT_CAP))
    report = sweep_audit(w, cert, args.max_degree, jobs=args.jobs, cap=cap)
    out = report.to_json()
    out["symbols"] = symbols.to_json()
    _emit(out)
    if report.counterexamples or report.lemma_failures:
        print("sweep found witness-free surfaces violating the audit", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_search(args) -> int:
    conf = _config(args)
    symbols = SymbolTable()
    target = _word(args.target, symbols)
    if len(target) != 1:
        raise InputError("the target must be a single nontrivial factor element")
    w = _word(args.word, symbols)
    budget = int(args.budget if args.budget is not None else conf.get("budget", DEFAULT_BUDGET))
    sols = search_equations(target[0], w, args.max_k, args.max_conj_len, args.max_exp, budget=budget)
    _emit({
        "count": len(sols),
        "solutions": [{"k": len(s.exponents),
                       "conjugators": [format_inline(g, symbols) for g in s.conjugators],
                       "exponents": list(s.exponents)} for s in sols],
        "symbols": symbols.to_json(),
    })
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stacklab", description="Relative stackings and admissible-surface audits.")
    p.add_argument("--config", help="JSON file overriding retries, caps and anchor constants")
    sub = p.add_subparsers(dest="command", required=True)

    pw = sub.add_parser("word", help="word utilities")
    pw.add_argument("op", choices=["reduce", "cyclic-reduce", "power", "prefixes"])
    pw.add_argument("word")
    pw.set_defaults(func=cmd_word)

    ps = sub.add_parser("stack", help="build and verify a stacking certificate")
    ps.add_argument("word")
    ps.add_argument("--out")
    ps.set_defaults(func=cmd_stack)

    pv = sub.add_parser("verify", help="check a certificate")
    pv.add_argument("cert")
    pv.set_defaults(func=cmd_verify)

    pa = sub.add_parser("audit", help="audit a surface against a certificate")
    pa.add_argument("surface")
    pa.add_argument("cert")
    pa.set_defaults(func=cmd_audit)

    pq = sub.add_parser("sweep", help="audit all surfaces up to a total degree")
    pq.add_argument("word")
    pq.add_argument("--max-degree", type=int, required=True)
    pq.add_argument("--jobs", type=int, default=0, help="worker processes (default: all cores)")
    pq.add_argument("--cert")
    pq.add_argument("--cap", type=int)
    pq.set_defaults(func=cmd_sweep)

    pe = sub.add_parser("search", help="bounded search for a = prod g_i w^n_i g_i^-1")
    pe.add_argument("--target", required=True)
    pe.add_argument("--word", required=True)
    pe.add_argument("--max-k", type=int, default=2)
    pe.add_argument("--max-conj-len", type=int, default=4)
    pe.add_argument("--max-exp", type=int, default=2)
    pe.add_argument("--budget", type=int)
    pe.set_defaults(func=cmd_search)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except _Fail as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PreconditionError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except StacklabError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
