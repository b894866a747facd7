"""Command-line entry point: ``fpairs <subcommand> ...``.

Exit codes: 0 success, 1 negative answer (infeasible, verification failed,
no plan found), 2 error (bad arguments, unreadable or degenerate input).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .geometry import GeometryError, RedundantPoint, VPolytope, facet_enumeration
from .lattice import LatticeError, build_face_lattice, fpair, polar_dual
from .oracle import INFEASIBLE, QueryError, feasible, kalai_check
from .planner import DEFAULT_BUDGET, Budget, CertifiedWitness, LawViolation, construct, invariant_checks, table, write_bundle

OK, NEGATIVE, ERROR = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(ERROR)


def _emit(args, payload: dict, text: str):
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=1, sort_keys=True))
    else:
        print(text)


def _load(path: str) -> VPolytope:
    if os.path.isdir(path):
        path = os.path.join(path, "witness.json")
    with open(path) as fh:
        return VPolytope.loads(fh.read())


# -- subcommands ---------------------------------------------------------------------


def cmd_feasible(args) -> int:
    v = feasible(args.d, args.f0, args.f1)
    lines = [f"(d={v.d}, f0={v.f0}, f1={v.f1}) excess {v.excess}: {v.status}"]
    lines += [f"  {r.rule}: {r.cite}" for r in v.reasons]
    lines += [f"  diagnostic {r.rule}: {r.cite}" for r in v.diagnostics]
    _emit(args, v.to_json(), "\n".join(lines))
    return NEGATIVE if v.status == INFEASIBLE else OK


def cmd_construct(args) -> int:
    out_dir = args.output or args.out_dir
    if out_dir is None:
        print("construct: an output directory is required (-o DIR)", file=sys.stderr)
        return ERROR
    v = feasible(args.d, args.f0, args.f1)
    if not v.admits:
        _emit(args, v.to_json(), f"(d={v.d}, f0={v.f0}, f1={v.f1}) is {v.status}; nothing to construct")
        return NEGATIVE
    budget = Budget(max_length=args.budget) if args.budget else DEFAULT_BUDGET
    try:
        w = construct(args.d, args.f0, args.f1, budget)
    except LawViolation as e:
        print(f"construct: {e}", file=sys.stderr)
        return ERROR
    if not isinstance(w, CertifiedWitness):
        _emit(args, w.to_json(), w.summary())
        return NEGATIVE
    paths = write_bundle(w, out_dir)
    cert = w.certificate()
    text = "\n".join([
        f"recipe: {w.recipe.label()}",
        f"fvector: {list(w.lattice.fvector)}",
        f"checks passed: {', '.join(w.checks)}",
        f"facet checksum (sha256): {cert['facet_checksum']['value']}",
    ] + [f"wrote {p}" for p in paths])
    _emit(args, {"status": "certified", "certificate": cert, "files": paths}, text)
    return OK


def _verify_report(P: VPolytope) -> tuple[bool, dict]:
    try:
        facets = facet_enumeration(P)
    except RedundantPoint as e:
        return False, {"irredundant": False, "redundant_point": e.index,
                       "message": f"vertex {e.index} is not extreme"}
    L = build_face_lattice(P, facets)
    checks = invariant_checks(L)
    fp = fpair(L)
    report = {
        "irredundant": True,
        "fpair": fp.to_json(),
        "checks": checks,
        "kalai_slack": kalai_check(L)[1],
        "lattice": L.to_json(),
        "facet_checksum": L.facet_checksum(),
    }
    return all(checks.values()), report


def cmd_verify(args) -> int:
    P = _load(args.file)
    ok, report = _verify_report(P)
    if ok and os.path.isdir(args.file):
        cert_path = os.path.join(args.file, "certificate.json")
        if os.path.exists(cert_path):
            with open(cert_path) as fh:
                cert = json.load(fh)
            same = cert.get("facet_checksum", {}).get("value") == report["facet_checksum"]
            report["certificate_matches"] = same
            ok = ok and same
    report["pass"] = ok
    if not report["irredundant"]:
        text = f"FAIL: {report['message']}"
    else:
        fp = report["fpair"]
        lines = [f"{'pass' if ok else 'FAIL'}: (f0, f1) = ({fp['f0']}, {fp['f1']}), d = {fp['d']}"]
        lines += [f"  {k}: {'ok' if v else 'FAILED'}" for k, v in report["checks"].items()]
        if "certificate_matches" in report:
            lines.append(f"  certificate checksum: {'matches' if report['certificate_matches'] else 'MISMATCH'}")
        text = "\n".join(lines)
    _emit(args, report, text)
    return OK if ok else NEGATIVE


def cmd_table(args) -> int:
    budget = DEFAULT_BUDGET
    rows = table(args.d, args.f0_max, certify_witnesses=args.certify, budget=budget)
    payload = {"d": args.d, "f0_max": args.f0_max, "rows": [r.to_json() for r in rows]}
    infeasible = [(r.f0, r.f1) for r in rows if r.verdict.status == INFEASIBLE]
    lines = [f"d={args.d}, f0 <= {args.f0_max}: {len(rows)} pairs, {len(infeasible)} infeasible"]
    by_f0: dict = {}
    for r in rows:
        by_f0.setdefault(r.f0, []).append(r)
    for n, rs in by_f0.items():
        counts: dict = {}
        for r in rs:
            counts[r.verdict.status] = counts.get(r.verdict.status, 0) + 1
        bad = [r.f1 for r in rs if r.verdict.status == INFEASIBLE]
        summary = ", ".join(f"{k} {v}" for k, v in counts.items())
        line = f"  f0={n:3d}  f1 {rs[0].f1}..{rs[-1].f1}  [{summary}]"
        if bad:
            line += f"  infeasible f1: {bad}"
        lines.append(line)
        if args.certify:
            for r in rs:
                if r.witness is not None:
                    lines.append(f"      ({r.f0},{r.f1}) {r.witness}" + (f": {r.recipe}" if r.recipe else ""))
    _emit(args, payload, "\n".join(lines))
    return OK


def cmd_dual(args) -> int:
    P = _load(args.file)
    Q = polar_dual(P)
    with open(args.output, "w") as fh:
        fh.write(Q.dumps())
    _emit(args, {"output": args.output, "nvertices": Q.nvertices}, f"wrote {args.output} ({Q.nvertices} vertices)")
    return OK


def cmd_fvector(args) -> int:
    L = build_face_lattice(_load(args.file))
    _emit(args, L.to_json(), f"fvector: {list(L.fvector)}")
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fpairs", description="(f0, f1) pairs of polytopes: verdicts, witnesses and checks")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("feasible", help="verdict for a (d, f0, f1) query")
    for name in ("d", "f0", "f1"):
        s.add_argument(name, type=int)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_feasible)

    s = sub.add_parser("construct", help="plan, execute and certify a witness")
    for name in ("d", "f0", "f1"):
        s.add_argument(name, type=int)
    s.add_argument("out_dir", nargs="?")
    s.add_argument("-o", "--output", help="bundle directory")
    s.add_argument("--budget", type=int, help="maximum recipe length (moves)")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_construct)

    s = sub.add_parser("verify", help="recheck a polytope file or bundle directory")
    s.add_argument("file")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("table", help="verdicts for the whole band up to f0-max")
    s.add_argument("d", type=int)
    s.add_argument("--f0-max", type=int, required=True)
    s.add_argument("--certify", action="store_true", help="also plan and certify each feasible pair")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_table)

    s = sub.add_parser("dual", help="write the polar dual of a polytope")
    s.add_argument("file")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_dual)

    s = sub.add_parser("fvector", help="print the f-vector (lattice JSON with --json)")
    s.add_argument("file")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_fvector)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (QueryError, ValueError, GeometryError, LatticeError, OSError, KeyError, TypeError) as e:
        msg = str(e) or type(e).__name__
        if getattr(args, "json", False):
            print(json.dumps({"error": msg}))
        else:
            print(f"{args.cmd}: error: {msg}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
