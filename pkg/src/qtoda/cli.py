"""
qtoda command line.

Exit codes: 0 pass, 1 verification failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from .pipeline import FAULTS, STAGES, Context, UnknownFault, run_pipeline
from .qcoh import relation_polynomial
from .rootsys import UnsupportedType
from .serial import canonical_dumps

VERIFY_STAGES = {
    "hypotheses": ("hypotheses",),
    "relations": ("relations",),
    "commutators": ("toda_solve", "commutators"),
    "flat-sections": ("flat_sections",),
    "all": STAGES,
}


def _rational(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")
    if value == 0:
        raise argparse.ArgumentTypeError("h must be nonzero")
    return value


def _emit(args, data: dict, text: str) -> None:
    blob = canonical_dumps(data)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(blob)
    if args.json:
        sys.stdout.write(blob)
    elif text:
        print(text)


def cmd_root_system(args, ctx: Context) -> int:
    rs, W = ctx.rs, ctx.W
    data = rs.to_json()
    data["weyl_order"] = W.order
    lines = [f"{rs.name}: |W| = {W.order}, {rs.n_positive} positive roots",
             "Cartan: " + str([list(r) for r in rs.cartan]),
             "Gram:   " + str([[str(x) for x in r] for r in rs.gram])]
    _emit(args, data, "\n".join(lines))
    return 0


def cmd_invariants(args, ctx: Context) -> int:
    inv = ctx.invariants
    data = {"type": ctx.rs.letter, "rank": ctx.rs.rank, "degrees": list(inv.degrees),
            "u": [u.to_json() for u in inv]}
    text = "\n".join(f"u{k} (deg {d}) = {u}" for k, (u, d) in enumerate(zip(inv, inv.degrees), start=1))
    _emit(args, data, text)
    return 0


def cmd_toda(args, ctx: Context) -> int:
    tis = ctx.integrals
    data = {"type": ctx.rs.letter, "rank": ctx.rs.rank, "integrals": [
        {"k": t.k, "degree": t.degree, "omega": t.omega.to_json(), "F": t.F.to_json(), "f": t.f.to_json()}
        for t in tis]}
    text = "\n".join(f"F{t.k} = {t.F}\nf{t.k} = {t.f}" for t in tis)
    _emit(args, data, text)
    return 0


def cmd_present(args, ctx: Context) -> int:
    tis = ctx.integrals
    rels = [relation_polynomial(t.F, ctx.rs) for t in tis]
    data = {
        "type": ctx.rs.letter,
        "rank": ctx.rs.rank,
        "u": [t.u.to_json() for t in tis],
        "F": [t.F.to_json() for t in tis],
        "relations": [r.to_json() for r in rels],
        "basis": ctx.basis.to_json(ctx.W),
        "B": [B.to_json() for B in ctx.Bs],
    }
    text = "\n".join(f"relation {k}: {r} = 0" for k, r in enumerate(rels, start=1))
    _emit(args, data, text)
    return 0


def _report(args, rep) -> int:
    lines = []
    for st in rep.stages:
        lines.append(f"[{'PASS' if st.passed else 'FAIL'}] {st.name}")
        for c in st.checks:
            if not c.passed:
                lines.append(f"    {c.name}: {len(c.failures)} failure(s) {c.failures[:1]}")
        if st.error:
            lines.append(f"    error: {st.error}")
    lines.append("PASS" if rep.passed else "FAIL")
    _emit(args, rep.to_json(), "\n".join(lines))
    if args.timings:
        for k, v in rep.timings.items():
            print(f"{k}: {v:.2f}s", file=sys.stderr)
    return 0 if rep.passed else 1


def cmd_verify(args, ctx: Context) -> int:
    rep = run_pipeline(args.type, args.rank, args.order, args.fault_inject, args.h_value,
                       stages=VERIFY_STAGES[args.what])
    return _report(args, rep)


def cmd_pipeline(args, ctx: Context) -> int:
    rep = run_pipeline(args.type, args.rank, args.order, args.fault_inject, args.h_value)
    return _report(args, rep)


def cmd_fixtures(args) -> int:
    from . import golden
    if args.regenerate:
        for p in golden.regenerate():
            print(f"wrote {p}")
        return 0
    bad = golden.check()
    for name in bad:
        print(f"stale fixture: {name}")
    print("fixtures up to date" if not bad else "fixtures differ")
    return 1 if bad else 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--type", required=True, help="Lie type letter A-G")
    common.add_argument("--rank", required=True, type=int)
    common.add_argument("--json", action="store_true", help="print canonical JSON")
    common.add_argument("--out", metavar="PATH", help="also write the JSON to PATH")
    common.add_argument("--order", type=int, default=3, help="e^t truncation order (default 3)")
    common.add_argument("--h-value", type=_rational, metavar="P/Q", help="evaluate flat-section checks at h")
    common.add_argument("--fault-inject", choices=FAULTS, metavar="KEY", help="testing only: corrupt B")
    common.add_argument("--timings", action="store_true", help="print stage timings to stderr")

    p = argparse.ArgumentParser(prog="qtoda", description="Quantum Toda integrals and quantum cohomology checks")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("root-system", parents=[common]).set_defaults(fn=cmd_root_system)
    sub.add_parser("invariants", parents=[common]).set_defaults(fn=cmd_invariants)
    sub.add_parser("toda", parents=[common]).set_defaults(fn=cmd_toda)
    sub.add_parser("present", parents=[common]).set_defaults(fn=cmd_present)
    v = sub.add_parser("verify", parents=[common])
    v.add_argument("what", choices=sorted(VERIFY_STAGES))
    v.set_defaults(fn=cmd_verify)
    sub.add_parser("pipeline", parents=[common]).set_defaults(fn=cmd_pipeline)
    fx = sub.add_parser("fixtures", help="compare golden fixtures with a fresh computation")
    fx.add_argument("--regenerate", action="store_true", help="rewrite the fixture files")
    fx.set_defaults(fn=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "fixtures":
        return cmd_fixtures(args)
    if args.order < 0:
        parser.error("--order must be non-negative")
    try:
        ctx = Context(args.type.upper(), args.rank, args.fault_inject)
        args.type = ctx.rs.letter
        if args.fault_inject:
            ctx.Bs
    except (UnsupportedType, UnknownFault) as exc:
        print(f"qtoda: error: {exc}", file=sys.stderr)
        return 2
    return args.fn(args, ctx)


if __name__ == "__main__":
    sys.exit(main())
