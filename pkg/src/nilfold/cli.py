"""Command-line interface: ``nilfold <command> [files] [flags]``.

Every command except ``builtin`` prints a report (text or JSON) with the
command echo, the sha256 fingerprint of each input table, the results and
the certificates needed to replay them.  Exit codes: 0 success, 2 invalid
input, 3 size guard or search budget hit.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

from . import commutators, higgins, loopcore, nilsum, substructure, triality
from .errors import GuardError, ValidationError


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None


def _load(path):
    return loopcore.parse_table(_read(path))


def _names(L, elements):
    return [L.name(x) for x in elements]


def _subset(S):
    return {"order": S.order, "elements": S.elements, "names": _names(S.parent, S.elements)}


# ---------------------------------------------------------------------------
# commands; each returns (inputs, parameters, results, certificates)


def cmd_info(args):
    L = _load(args.file)
    moufang = loopcore.is_moufang(L) if L.order <= loopcore.TRIPLE_SCAN_LIMIT else None
    assoc = loopcore.is_associative(L) if L.order <= loopcore.TRIPLE_SCAN_LIMIT else None
    res = {
        "order": L.order,
        "latin_square_with_identity": True,
        "group": None if assoc is None else bool(assoc),
        "commutative": bool(loopcore.is_commutative(L)),
        "moufang": None if moufang is None else bool(moufang),
        "centre": _subset(substructure.centre(L)),
        "nucleus": _subset(substructure.nucleus(L)),
        "moufang_centre": _subset(substructure.moufang_centre(L)),
    }
    cert = {}
    if assoc is not None and not assoc:
        cert["non_associative_triple"] = list(assoc.witness)
    if moufang is not None and not moufang:
        cert["moufang_failure"] = list(moufang.witness)
    return [L], {}, res, cert


def cmd_nilclass(args):
    L = _load(args.file)
    series = commutators.lower_central_series(L)
    c = commutators.nilpotency_class(L)
    res = {
        "class": c if c is not None else "not nilpotent",
        "lower_central_series": [_subset(g) for g in series],
    }
    return [L], {}, res, {}


def cmd_tower(args):
    L = _load(args.file)
    rep = commutators.tower_report(L, args.max_n)
    return [L], {"max_n": args.max_n}, rep.as_dict(), {}


def _folded_answer(s):
    if s.upper.is_trivial:
        return "yes"
    if not s.lower.is_trivial:
        return "no"
    return "unknown"


def cmd_higgins(args):
    L = _load(args.file)
    s = higgins.higgins_sandwich(L, args.n, args.depth, args.budget, args.workers)
    d = s.as_dict()
    cert = {"witnesses": d.pop("witnesses"), "upper_certificate": d.pop("upper_certificate")}
    d["n_folded"] = _folded_answer(s)
    params = {"n": args.n, "depth": args.depth, "budget": args.budget}
    return [L], params, d, cert


def cmd_foldclass(args):
    L = _load(args.file)
    fc = higgins.fold_class(L, args.max_n, args.depth, args.budget)
    res = {
        "fold_class": fc.value() if fc.exact else None,
        "lower": fc.lower,
        "upper": fc.upper,
        "answers": {str(n): a for n, a in sorted(fc.answers.items())},
    }
    params = {"max_n": args.max_n, "depth": args.depth, "budget": args.budget}
    return [L], params, res, {}


def cmd_cosmash(args):
    X, Y = _load(args.x), _load(args.y)
    cop = nilsum.coproduct2(X, Y, args.p)
    k = nilsum.cosmash2(X, Y, args.p)
    ranks = [c.shape[1] for c in cop.group.coords]
    res = {
        "sum_order": cop.order,
        "cosmash_order": k.order,
        "order_identity_holds": cop.order == X.order * Y.order * k.order,
        "abelianisation_ranks": ranks,
        "theta_central_surjection": nilsum.theta_is_central_surjection(cop),
    }
    cert = {"model_verification": cop.verification}
    return [X, Y], {"p": args.p}, res, cert


def cmd_cr3(args):
    X, Y, Z = _load(args.x), _load(args.y), _load(args.z)
    r = nilsum.cr3_report(X, Y, Z, args.p)
    res = {
        "sum_order": r.sum_order,
        "limit_order": r.limit_order,
        "cr3_order": r.cr3_order,
        "cr2_orders": list(r.cr2_orders),
        "theta3_bijective": r.theta3_bijective,
    }
    return [X, Y, Z], {"p": args.p}, res, {"model_verification": r.verification}


def _datum(path):
    return triality.parse_datum(_read(path))


def cmd_triality_check(args):
    d = _datum(args.file)
    chk = triality.is_triality_group(d)
    S = triality.special_elements(d)
    res = {"order": d.order, "special_elements": _subset(S), "triality_group": bool(chk)}
    cert = {}
    if not chk:
        g, h = chk.witness
        gh = d.G.mul(g, h)
        cert["violating_pair"] = {"g": g, "h": h, "cube_of_gh": int(d.G.power(gh, 3))}
    return [d.G], {}, res, cert


def cmd_triality_reflect(args):
    d = _datum(args.file)
    r = triality.reflect_to_triality(d)
    res = {
        "order_before": d.order,
        "order_after": r.datum.order,
        "rounds": r.rounds,
        "triality_group": bool(triality.is_triality_group(r.datum)),
    }
    cert = {"projection": [int(v) for v in r.projection.map], "reflected_datum": triality.format_datum(r.datum)}
    return [d.G], {}, res, cert


# ---------------------------------------------------------------------------
# output


def _render_text(obj, indent=0):
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and not _flat(v):
                lines.append(f"{pad}{k}:")
                lines += _render_text(v, indent + 1)
            elif isinstance(v, str) and "\n" in v:
                lines.append(f"{pad}{k}: |")
                lines += [pad + "  " + ln for ln in v.rstrip("\n").split("\n")]
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
    else:
        for v in obj:
            if isinstance(v, (dict, list)) and not _flat(v):
                lines.append(f"{pad}-")
                lines += _render_text(v, indent + 1)
            else:
                lines.append(f"{pad}- {_scalar(v)}")
    return lines


def _flat(v):
    return isinstance(v, list) and all(not isinstance(x, (dict, list)) for x in v)


def _scalar(v):
    if isinstance(v, list):
        return "[" + ", ".join(_scalar(x) for x in v) + "]"
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    return "\n".join(_render_text(report)) + "\n"


COMMANDS = {
    "info": cmd_info,
    "nilclass": cmd_nilclass,
    "tower": cmd_tower,
    "higgins": cmd_higgins,
    "foldclass": cmd_foldclass,
    "cosmash": cmd_cosmash,
    "cr3": cmd_cr3,
    "triality-check": cmd_triality_check,
    "triality-reflect": cmd_triality_reflect,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nilfold", description="Commutators and nilpotency of finite loops.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--timing", action="store_true", help="add wall-clock time (reports stop being reproducible)")
        return p

    def search(p):
        p.add_argument("--depth", type=int, default=higgins.DEFAULT_DEPTH)
        p.add_argument("--budget", type=int, default=higgins.DEFAULT_BUDGET)
        return p

    common(sub.add_parser("info", help="basic properties")).add_argument("file")
    common(sub.add_parser("nilclass", help="lower central series and class")).add_argument("file")
    p = common(sub.add_parser("tower", help="nilpotency tower I^0..I^max-n"))
    p.add_argument("file")
    p.add_argument("--max-n", type=int, default=3)
    p = search(common(sub.add_parser("higgins", help="Higgins commutator sandwich")))
    p.add_argument("file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    p = search(common(sub.add_parser("foldclass", help="least n with the loop n-folded")))
    p.add_argument("file")
    p.add_argument("--max-n", type=int, default=3)
    p = common(sub.add_parser("cosmash", help="sum and co-smash product in N(2,p)"))
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("--p", type=int, default=3)
    p = common(sub.add_parser("cr3", help="third cross-effect in N(2,p)"))
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("z")
    p.add_argument("--p", type=int, default=3)
    common(sub.add_parser("triality-check", help="check the triality axiom")).add_argument("file")
    common(sub.add_parser("triality-reflect", help="reflect a datum onto triality groups")).add_argument("file")
    p = sub.add_parser("builtin", help="print a built-in table")
    p.add_argument("name", help="o16, q8, d4, d8, s3, heisenberg27, z9_semidirect_s3, z3_semidirect_s3 or z/n")
    p.add_argument("--datum", action="store_true", help="print a triality datum instead (s3, s3xz2, z3_semidirect_s3, z9_semidirect_s3)")
    return ap


def _builtin(args):
    if args.datum:
        if args.name not in triality.DATUM_BUILTINS:
            raise ValidationError(f"unknown datum {args.name!r}; choose from {', '.join(sorted(triality.DATUM_BUILTINS))}")
        return triality.format_datum(triality.DATUM_BUILTINS[args.name]())
    return loopcore.format_table(loopcore.builtin(args.name))


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        if args.command == "builtin":
            sys.stdout.write(_builtin(args))
            return 0
        start = time.perf_counter()
        inputs, params, results, certs = COMMANDS[args.command](args)
        report = {
            "command": ["nilfold"] + argv,
            "inputs": [{"order": L.order, "sha256": L.fingerprint()} for L in inputs],
            "parameters": params,
            "results": results,
            "certificates": certs,
        }
        if args.timing:
            report["timing_seconds"] = round(time.perf_counter() - start, 6)
        sys.stdout.write(render(report, args.format))
        return 0
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GuardError as exc:
        print(f"limit: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
