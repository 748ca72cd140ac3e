"""Command-line front end: ``wallcross <verb> [options]``.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 precision
(q-window) failure.  ``WALLCROSS_DMAX`` overrides the default truncation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .crossing import crossing_terms, delta as delta_op
from .geometry import GeometryError, format_class, parse_class, surface, walls_on
from .invariants import (blowdown_p2, blowup_poly, chi_at, kdon_convention,
                         strange_duality_dims)
from .lpoly import LambdaPoly
from .modular import SERIES_NAMES, context_for
from .series import SeriesError, WindowError, rational_str
from .verify import SUITES, run_verify

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_PRECISION = 0, 1, 2, 3
DEFAULT_DMAX = 24


class UsageError(Exception):
    pass


def default_dmax() -> int:
    env = os.environ.get("WALLCROSS_DMAX")
    if env is None:
        return DEFAULT_DMAX
    try:
        v = int(env)
    except ValueError:
        raise UsageError(f"WALLCROSS_DMAX={env!r} is not an integer") from None
    if v < 1:
        raise UsageError("WALLCROSS_DMAX must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--surface", default="P2hat", help="P2, P1xP1, P2hat, Bl2P2, Bl1P1xP1")
    common.add_argument("--c1", default="0", help="first Chern class, e.g. 0, F, H, E")
    common.add_argument("--L", dest="L", default="0", help="line bundle, e.g. 3H-E or 2F+G")
    common.add_argument("--from", dest="H_from", help="starting polarization")
    common.add_argument("--to", dest="H_to", help="target polarization")
    common.add_argument("--pol", help="polarization: a class, F+ or G+")
    common.add_argument("--tiebreak", help="direction v: use the chamber of pol + eps*v")
    common.add_argument("--dmax", type=int, default=None,
                        help=f"Lambda truncation (default {DEFAULT_DMAX} or $WALLCROSS_DMAX)")
    common.add_argument("--qmargin", type=int, default=4,
                        help="extra q-window beyond 4*dmax+4 (default 4)")
    common.add_argument("--jobs", type=int, default=None, help="worker threads (default: all cores)")
    common.add_argument("--format", choices=("table", "json"), default="table")

    p = argparse.ArgumentParser(prog="wallcross",
                                description="K-theoretic Donaldson invariants by wallcrossing")
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("series", parents=[common], help="dump a named modular series")
    s.add_argument("name", choices=SERIES_NAMES)

    s = sub.add_parser("delta", parents=[common], help="wallcrossing term delta_xi(L)")
    s.add_argument("--xi", required=True, help="wall class, e.g. 2E")
    s.add_argument("--path", choices=("bar", "full"), default="bar")

    sub.add_parser("walls", parents=[common],
                   help="walls between --from and --to, or through --pol")

    s = sub.add_parser("chi", parents=[common], help="generating function chi^{X,H}_{c1}(L)")
    s.add_argument("--convention", choices=("raw", "theorem"), default="raw")

    s = sub.add_parser("verify", parents=[common], help="run verification suites")
    s.add_argument("suite", nargs="?", default="all", choices=SUITES + ("all",))

    s = sub.add_parser("blowup-poly", parents=[common], help="blowup polynomials R_n, S_n")
    s.add_argument("n", type=int)

    s = sub.add_parser("dims", parents=[common], help="strange duality dimension check")
    s.add_argument("--c2max", type=int, default=10)
    return p


# ---------------------------------------------------------------------------
# output


def _table(headers, rows) -> str:
    rows = [[str(c) for c in r] for r in rows]
    widths = [max([len(h)] + [len(r[i]) for r in rows]) for i, h in enumerate(headers)]
    fmt = lambda r: "  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip()
    lines = [fmt(headers), fmt(["-" * w for w in widths])]
    lines += [fmt(r) for r in rows]
    return "\n".join(lines)


def _poly_rows(p: LambdaPoly):
    return [(d, rational_str(c)) for d, c in p.items()]


def _emit(args, obj, table_text: str):
    if args.format == "json":
        print(json.dumps(obj, indent=2))
    else:
        print(table_text)


# ---------------------------------------------------------------------------
# verbs


def _cls(text, X, what):
    if text is None:
        raise UsageError(f"--{what} is required")
    return parse_class(text, X)


def cmd_series(args, D):
    ctx = context_for(D, args.qmargin)
    s = ctx.named(args.name)
    rows = [(d, k, str(c)) for (d, k), c in s.terms()]
    _emit(args, s.to_json_obj(), _table(["d", "k", "coefficient"], rows))
    return EXIT_OK


def cmd_delta(args, D):
    X = surface(args.surface)
    xi, L = _cls(args.xi, X, "xi"), _cls(args.L, X, "L")
    ctx = context_for(D, args.qmargin)
    res = delta_op(ctx, X, xi, L, D, path=args.path)
    obj = {"xi": format_class(xi), "delta": res.delta.to_json_obj()}
    head = f"xi = {format_class(xi)}, xi^2 = {res.xi.square}, N = {res.xi.N}\n"
    _emit(args, obj, head + _table(["d", "coefficient"], _poly_rows(res.delta)))
    return EXIT_OK


def cmd_walls(args, D):
    X = surface(args.surface)
    c1, L = _cls(args.c1, X, "c1"), _cls(args.L, X, "L")
    if args.H_from is not None and args.H_to is not None:
        terms = crossing_terms(X, c1, L, parse_class(args.H_from, X, allow_half=True),
                               parse_class(args.H_to, X, allow_half=True), D)
    elif args.pol is not None:
        H = parse_class(args.pol, X, allow_half=True)
        terms = [(Fraction(1), w) for w in walls_on(X, c1, H, L, D)]
    else:
        raise UsageError("walls needs --from and --to, or --pol")
    obj = [{"xi": format_class(w.xi), "weight": rational_str(wt), "square": w.square, "N": w.N}
           for wt, w in terms]
    rows = [(o["xi"], o["weight"], o["square"], o["N"]) for o in obj]
    _emit(args, obj, _table(["xi", "weight", "xi^2", "N"], rows))
    return EXIT_OK


def _pol_spec(args, X):
    if args.pol is None:
        raise UsageError("chi needs --pol")
    if args.pol in ("F+", "G+"):
        if args.tiebreak:
            raise UsageError("--tiebreak applies to class polarizations only")
        return args.pol
    H = parse_class(args.pol, X, allow_half=True)
    if args.tiebreak:
        return H, parse_class(args.tiebreak, X, allow_half=True)
    return H


def cmd_chi(args, D):
    X = surface(args.surface)
    ctx = context_for(max(D, 5), args.qmargin)
    if X.name == "P2":
        L = _cls(args.L, X, "L")
        c1 = _cls(args.c1, X, "c1")
        if c1.coords[0] % 2 == 0:
            tag = "0"
        else:
            tag = "H"
        g = blowdown_p2(ctx, tag, int(L.coords[0]), D, args.jobs)
    else:
        g = chi_at(ctx, X, _cls(args.c1, X, "c1"), _cls(args.L, X, "L"), _pol_spec(args, X), D,
                   args.jobs)
    if args.convention == "theorem":
        if not g.c1.congruent_mod2(g.surface.zero()):
            raise UsageError("--convention theorem applies to c1 = 0 only")
        g = kdon_convention(ctx, g, args.jobs)
    obj = g.to_json_obj()
    head = (f"{g.surface.name}: c1 = {obj['c1']}, L = {obj['L']}, "
            f"H = {obj['polarization']}, convention = {g.convention}\n")
    _emit(args, obj, head + _table(["d", "coefficient"], _poly_rows(g.series)))
    return EXIT_OK


def _verify_rows(rep, prefix=""):
    rows = []
    if "suites" in rep:
        for r in rep["suites"]:
            rows += _verify_rows(r)
        return rows
    for c in rep["checks"]:
        f = c["failure"]
        detail = "" if f is None else (f"d={f['d']} k={f['k']} expected {f['expected']} "
                                       f"got {f['got']}")
        rows.append((rep["suite"], "PASS" if c["ok"] else "FAIL", c["name"], detail))
    return rows


def cmd_verify(args, D):
    rep = run_verify(args.suite, args.dmax, args.qmargin, args.jobs)
    text = _table(["suite", "result", "check", "first failure"], _verify_rows(rep))
    text += f"\n\n{'PASS' if rep['ok'] else 'FAIL'}: {args.suite}"
    _emit(args, rep, text)
    return EXIT_OK if rep["ok"] else EXIT_FAIL


def cmd_blowup_poly(args, D):
    bp = blowup_poly(args.n)
    obj = {"n": args.n, "R": str(bp.R), "S": str(bp.S)}
    _emit(args, obj, f"R_{args.n} = {bp.R}\nS_{args.n} = {bp.S}")
    return EXIT_OK


def cmd_dims(args, D):
    rows = strange_duality_dims(args.c2max)
    ok = all(a == b for _, a, b in rows)
    obj = {"ok": ok, "rows": [{"c2": c, "coefficient": rational_str(a), "binomial": b}
                              for c, a, b in rows]}
    text = _table(["c2", "coefficient", "C(c2+4,5)"], [(c, rational_str(a), b) for c, a, b in rows])
    _emit(args, obj, text)
    return EXIT_OK if ok else EXIT_FAIL


_VERBS = {"series": cmd_series, "delta": cmd_delta, "walls": cmd_walls, "chi": cmd_chi,
          "verify": cmd_verify, "blowup-poly": cmd_blowup_poly, "dims": cmd_dims}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        D = args.dmax if args.dmax is not None else default_dmax()
        if D < 1:
            raise UsageError("--dmax must be positive")
        if args.jobs is not None and args.jobs < 1:
            raise UsageError("--jobs must be positive")
        return _VERBS[args.verb](args, D)
    except WindowError as exc:
        print(f"precision failure: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (UsageError, GeometryError, SeriesError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
