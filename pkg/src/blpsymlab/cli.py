"""Command-line entry point.

Commands:
    verify symmetries|solutions|reductions|claws|potential [ids...]
    tables commutator|adjoint [--format text|json]
    grid SOL_ID [--figure NAME] [--window AX=LO:HI,...] [--fixed AX=V,...]
         [--resolution N] [--set KEY=VALUE ...] [--format csv|json]
         [--output PATH]
    report [--output PATH] [--seed N] [--grid-resolution N]

Exit status: 0 all selected checks pass, 1 failures, 2 undecided verdicts
present, 64 unknown id, 65 singular/empty window.  The environment variable
BLP_SYMLAB_THREADS caps parallelism.  Reports are byte-deterministic for a
fixed seed (no timestamps).  CSV grids use the axis names as header and
write missing (singular or out-of-domain) samples as empty fields.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import blp, claws, liealg, report, solutions
from .expr import ExprError, num, parse, sym

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_UNDECIDED = 2
EXIT_UNKNOWN_ID = 64
EXIT_SINGULAR = 65


def _emit(doc, path=None):
    text = json.dumps(doc, indent=2, sort_keys=True)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _verdict_exit(verdict: str) -> int:
    return {"pass": EXIT_OK, "undecided": EXIT_UNDECIDED}.get(verdict,
                                                              EXIT_FAIL)


def _parse_kv(items, conv):
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ExprError(f"expected KEY=VALUE, got '{item}'")
        k, _, v = item.partition("=")
        out[k.strip()] = conv(v.strip())
    return out


def cmd_verify(args) -> int:
    what = args.what
    if what == "symmetries":
        doc = report.symmetry_section()
    elif what == "solutions":
        ids = args.ids or None
        known = set(solutions.solution_catalog())
        for sid in args.ids:
            if sid not in known:
                print(f"unknown solution id '{sid}'", file=sys.stderr)
                return EXIT_UNKNOWN_ID
        doc = report.solutions_section(ids, seed=args.seed)
    elif what == "reductions":
        known = set(solutions.reduction_catalog())
        for rid in args.ids:
            if rid not in known:
                print(f"unknown reduction id '{rid}'", file=sys.stderr)
                return EXIT_UNKNOWN_ID
        doc = report.reductions_section(args.ids or None)
    elif what == "claws":
        doc = report.claws_section()
    elif what == "potential":
        doc = report.potential_section()
    elif what == "cases":
        doc = report.tables_section()
    else:
        print(f"unknown verification suite '{what}'", file=sys.stderr)
        return EXIT_UNKNOWN_ID
    _emit(doc, args.output)
    return _verdict_exit(doc["verdict"])


def cmd_tables(args) -> int:
    eps = sym("eps")
    if args.which == "commutator":
        cells = liealg.computed_commutator_table()
        verdict = liealg.verify_commutator_table()
        corner = "[Xi,Xj]"
    elif args.which == "adjoint":
        cells = liealg.computed_adjoint_table(eps)
        verdict = liealg.verify_adjoint_table()
        corner = "Ad(exp(eps Xi)) Xj"
    else:
        print(f"unknown table '{args.which}'", file=sys.stderr)
        return EXIT_UNKNOWN_ID
    if args.format == "text":
        out = liealg.render_table_text(cells, corner)
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(out + "\n")
        else:
            print(out)
    else:
        _emit({"table": args.which,
               "cells": liealg.render_table_json(cells),
               "verification": verdict}, args.output)
    return _verdict_exit(verdict["verdict"])


def cmd_grid(args) -> int:
    try:
        window = None
        if args.window:
            window = {}
            for part in args.window.split(","):
                ax, _, rng = part.partition("=")
                lo, _, hi = rng.partition(":")
                window[ax.strip()] = (float(Fraction(lo)),
                                      float(Fraction(hi)))
        fixed = None
        if args.fixed:
            fixed = {k: float(v) for k, v in _parse_kv(
                args.fixed.split(","), Fraction).items()}
        binding = None
        overrides = _parse_kv(args.set, lambda s: str(s))
        if overrides:
            entry = solutions.get_solution(args.solution)
            base = dict(entry.bindings[0].get("params", {}))
            base.update(overrides)
            binding = {"params": base,
                       "funcs": entry.bindings[0].get("funcs", {})}
        g = solutions.grid(args.solution, figure=args.figure, window=window,
                           fixed=fixed, resolution=args.resolution,
                           binding=binding)
    except solutions.UnknownIdError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_UNKNOWN_ID
    except (solutions.EmptyWindowError, solutions.SingularPointError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_SINGULAR
    if args.format == "csv":
        if args.output:
            g.write_csv(args.output)
        else:
            import io

            buf = io.StringIO()
            import csv as _csv

            w = _csv.writer(buf)
            w.writerow([g.axes[0], g.axes[1], "u", "v"])
            for p, q, uu, vv in g.rows():
                w.writerow([repr(p), repr(q),
                            "" if uu is None else repr(uu),
                            "" if vv is None else repr(vv)])
            sys.stdout.write(buf.getvalue())
    else:
        _emit(g.to_json(), args.output)
    return EXIT_OK


def cmd_report(args) -> int:
    doc = report.full_report(seed=args.seed,
                             grid_resolution=args.grid_resolution)
    _emit(doc, args.output)
    return _verdict_exit(doc["verdict"])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="blpsymlab",
        description="Symbolic-numeric verification laboratory for a "
                    "generalized (2+1)-dimensional BLP water-wave system.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("what", choices=["symmetries", "solutions", "reductions",
                                    "claws", "potential", "cases"])
    v.add_argument("ids", nargs="*", help="optional catalog ids")
    v.add_argument("--seed", type=int, default=20240101)
    v.add_argument("--output")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("tables", help="render/verify the algebra tables")
    t.add_argument("which", choices=["commutator", "adjoint"])
    t.add_argument("--format", choices=["text", "json"], default="text")
    t.add_argument("--output")
    t.set_defaults(func=cmd_tables)

    g = sub.add_parser("grid", help="export a figure grid")
    g.add_argument("solution")
    g.add_argument("--figure")
    g.add_argument("--window", help="AX=LO:HI[,AX=LO:HI]")
    g.add_argument("--fixed", help="AX=VALUE[,AX=VALUE]")
    g.add_argument("--resolution", type=int, default=200)
    g.add_argument("--set", action="append",
                   help="parameter override KEY=VALUE (exact rational)")
    g.add_argument("--format", choices=["csv", "json"], default="csv")
    g.add_argument("--output")
    g.set_defaults(func=cmd_grid)

    r = sub.add_parser("report", help="run everything, one JSON document")
    r.add_argument("--seed", type=int, default=20240101)
    r.add_argument("--grid-resolution", type=int, default=50)
    r.add_argument("--output")
    r.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except solutions.UnknownIdError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_UNKNOWN_ID
    except (solutions.EmptyWindowError, solutions.SingularPointError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_SINGULAR
    except ExprError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
