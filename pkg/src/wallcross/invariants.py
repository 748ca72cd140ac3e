"""Generating functions chi^{X,H}_{c1}(L) of K-theoretic Donaldson invariants.

Every generating function is assembled from a starting value at a fibre
class of a ruling (the boundary kernels at F_+ or G_+, or zero when c1 has odd
degree on the fibre) followed by the finite wall sum to the target
polarization.  Series are kept in the raw normalization of the wallcrossing
formula; :func:`kdon_convention` rewrites the Lambda^4 term.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field
from fractions import Fraction

import sympy

from .crossing import default_jobs, product_upto, core_series, sum_terms, wall_sum, \
    tie_break_correction
from .geometry import (P2, P2HAT, DivisorClass, GeometryError, Surface, enumerate_walls,
                       format_class, ruling_coords, surface as surface_named)
from .lpoly import LambdaPoly
from .modular import ModularContext, build_context, default_window
from .series import BiSeries, SeriesError


@dataclass
class GenFun:
    surface: Surface
    c1: DivisorClass
    L: DivisorClass
    polarization: str
    series: LambdaPoly
    convention: str = "raw"
    routes: dict = field(default_factory=dict)

    @property
    def d_max(self) -> int:
        return self.series.D

    def to_json_obj(self) -> dict:
        return {
            "surface": self.surface.name,
            "c1": format_class(self.c1),
            "L": format_class(self.L),
            "polarization": self.polarization,
            "convention": self.convention,
            "series": self.series.to_json_obj(),
            "lambda_truncation": self.series.D,
        }


# ---------------------------------------------------------------------------
# boundary kernels


def _kernel_q0(ctx: ModularContext, kind: str, A2: int, e: int, scale, d_max: int) -> LambdaPoly:
    if d_max + 1 > ctx.D:
        # csch and coth start at Lambda^-1, so one extra degree is consumed
        ctx = build_context(d_max + 1, max(ctx.W, default_window(d_max + 1)))
    kern = ctx.kernel(kind, A2)
    prod = product_upto(kern, core_series(ctx, e, 0), 0).truncate(d_max)
    out = {}
    for d, c in prod.coeff_q0(d_max).items():
        if not c.is_real():
            raise SeriesError(f"boundary kernel has a non-real coefficient at Lambda^{d}")
        if c.re:
            out[d] = c.re * scale
    return LambdaPoly(out, d_max)


def _ruled_L(surface: Surface, n, m) -> DivisorClass:
    L = surface.basis("F") * Fraction(n) + surface.basis("G") * Fraction(m)
    if not L.is_integral():
        raise GeometryError(f"{n}F+{m}G is not a line bundle on {surface.name}")
    return L


def _mod2_kind(surface: Surface, c1: DivisorClass) -> str:
    """Which boundary kernel applies at F_+: '0', 'F' or 'odd' (vanishing)."""
    if not c1.is_integral():
        raise GeometryError(f"c1 = {c1} is not integral")
    F = surface.basis("F")
    if (c1.pair(F) % 2) == 1:
        return "odd"
    if c1.congruent_mod2(surface.zero()):
        return "0"
    if c1.congruent_mod2(F):
        return "F"
    return "other"


def chi_fplus(ctx: ModularContext, surface: Surface, c1, n, m, d_max: int) -> GenFun:
    """chi^{X,F_+}_{c1}(nF+mG) from the boundary kernels."""
    if surface.name not in ("P1xP1", "P2hat"):
        raise GeometryError("F_+ kernels exist for P1xP1 and P2hat only")
    if isinstance(c1, str):
        c1 = surface.zero() if c1 == "0" else surface.basis(c1)
    L = _ruled_L(surface, n, m)
    if (c1.pair(L) % 2) != 0:
        raise GeometryError("<c1, L> must be even")
    n, m = Fraction(n), Fraction(m)
    e = 2 * (n + 2) * (m + 2)
    if e.denominator != 1 or m.denominator != 1:
        raise GeometryError("m must be an integer")
    e, A2 = int(e), int(m) + 2
    kind = _mod2_kind(surface, c1)
    if kind == "odd":
        series = LambdaPoly({}, d_max)
    elif kind == "F":
        if A2 == 0:
            raise SeriesError("the F_+ kernel is singular for m = -2")
        series = _kernel_q0(ctx, "csch", A2, e, Fraction(1, 2), d_max)
    elif kind == "0":
        if A2 == 0:
            raise SeriesError("the F_+ kernel is singular for m = -2")
        series = _kernel_q0(ctx, "coth", A2, e, Fraction(-1, 2), d_max)
    else:
        raise GeometryError(f"no F_+ kernel for c1 = {c1}")
    return GenFun(surface, c1, L, "F+", series)


def chi_gplus(ctx: ModularContext, c1, n, m, d_max: int) -> GenFun:
    """chi^{P1xP1,G_+}_{c1}(nF+mG), the mirror image of the F_+ kernel."""
    X = surface_named("P1xP1")
    if isinstance(c1, str):
        c1 = X.zero() if c1 == "0" else X.basis(c1)
    swapped = X.cls(c1.coords[1], c1.coords[0])
    g = chi_fplus(ctx, X, swapped, m, n, d_max)
    return GenFun(X, c1, _ruled_L(X, n, m), "G+", g.series)


# ---------------------------------------------------------------------------
# chambers


def _fibres(surface: Surface):
    return [surface.cls(*f) for f in surface.fibres]


def start_value(ctx: ModularContext, surface: Surface, c1: DivisorClass, L: DivisorClass,
                d_max: int, fibre: DivisorClass | None = None):
    """(f, chi^{f_+}) for a fibre class f where the generating function is known."""
    cands = [fibre] if fibre is not None else _fibres(surface)
    for f in cands:
        if (c1.pair(f) % 2) == 1:
            return f, LambdaPoly({}, d_max)
        if surface.name in ("P1xP1", "P2hat"):
            F = surface.basis("F")
            if f.coords == F.coords and _mod2_kind(surface, c1) in ("0", "F"):
                n, m = ruling_coords(L)
                return f, chi_fplus(ctx, surface, c1, n, m, d_max).series
            if surface.name == "P1xP1" and f.coords == surface.basis("G").coords:
                sw = surface.cls(c1.coords[1], c1.coords[0])
                if _mod2_kind(surface, sw) in ("0", "F"):
                    n, m = ruling_coords(L)
                    return f, chi_gplus(ctx, c1, n, m, d_max).series
    raise GeometryError(f"no known starting value for c1 = {c1} on {surface.name}")


def parse_polarization(spec, surface: Surface):
    """Normalize a polarization spec to (class | 'F+' | 'G+', tie-break | None)."""
    if isinstance(spec, tuple):
        return spec
    if isinstance(spec, str) and spec in ("F+", "G+"):
        return spec, None
    return spec, None


def chi_at(ctx: ModularContext, surface: Surface, c1: DivisorClass, L: DivisorClass, H_spec,
           d_max: int, jobs: int | None = None, fibre: DivisorClass | None = None) -> GenFun:
    """chi^{X,H}_{c1}(L) through Lambda^d_max.

    ``H_spec`` is a class (the averaged value is returned when it lies on a
    wall), ``(H, v)`` for the chamber value at ``H + eps*v``, or the tags
    ``'F+'``/``'G+'``.
    """
    if (c1.pair(L) % 2) != 0:
        raise GeometryError("<c1, L> must be even")
    H, v = parse_polarization(H_spec, surface)
    if H == "F+":
        n, m = ruling_coords(L)
        return chi_fplus(ctx, surface, c1, n, m, d_max)
    if H == "G+":
        n, m = ruling_coords(L)
        return chi_gplus(ctx, c1, n, m, d_max)
    if surface.rank == 1:
        raise GeometryError("P2 invariants are obtained through blowdown_p2")
    f, start = start_value(ctx, surface, c1, L, d_max, fibre)
    total = start + wall_sum(ctx, surface, c1, L, f, H, d_max, jobs=jobs)
    label = format_class(H)
    if v is not None:
        total = total + tie_break_correction(ctx, surface, c1, L, H, v, d_max, jobs)
        label = f"{label}+eps({format_class(v)})"
    return GenFun(surface, c1, L, label, total.truncate(d_max))


# ---------------------------------------------------------------------------
# blowdown to P2


def blowdown_p2(ctx: ModularContext, c1: str, k: int, d_max: int, jobs: int | None = None) -> GenFun:
    """chi^{P2,H}_{c1}(kH) for c1 in {'0', 'H'} from the one-point blowup.

    Two routes are computed and must agree: the on-wall value at H on the
    blowup (equal to the P2 series, divided by Lambda when c1 = H), and the
    blowdown division of the value for kH - E by 1 - Lambda^4.
    """
    X = P2HAT
    H, E = X.basis("H"), X.basis("E")
    L = H * k
    one_minus = LambdaPoly({0: 1, 4: -1}, None)
    if c1 == "0":
        direct = chi_at(ctx, X, X.zero(), L, H, d_max, jobs).series
        blown = chi_at(ctx, X, X.zero(), L - E, H, d_max, jobs).series / one_minus
        cls_p2 = P2.zero()
    elif c1 == "H":
        if k % 2:
            raise GeometryError("<H, kH> must be even, so k must be even")
        # one extra degree, since the division by Lambda lowers the truncation
        if ctx.D < d_max + 1:
            ctx = build_context(d_max + 1, max(ctx.W, default_window(d_max + 1)))
        direct = chi_at(ctx, X, H + E, L, H, d_max + 1, jobs).series.divide_by_lambda(1)
        blown = chi_at(ctx, X, H, L - E, H, d_max, jobs).series / one_minus
        cls_p2 = P2.basis("H")
    else:
        raise GeometryError("c1 must be '0' or 'H'")
    top = min(direct.D, blown.D)
    mism = direct.first_mismatch(blown, top)
    if mism is not None:
        d, a, b = mism
        raise SeriesError(f"blowdown routes disagree at Lambda^{d}: {a} vs {b}")
    return GenFun(P2, cls_p2, P2.basis("H") * k, "H", direct.truncate(top),
                  routes={"on-wall": direct, "blowdown": blown})


# ---------------------------------------------------------------------------
# Lambda^4 convention


def convention_constant(surface: Surface, L: DivisorClass) -> Fraction:
    """<L,K> - (K^2 + L^2)/2 - 1, the shift between raw and actual Lambda^4 terms."""
    K = surface.K
    return L.pair(K) - (K.square + L.square) / 2 - 1


def _lift_to_blowup(c: DivisorClass, target: Surface) -> DivisorClass:
    coords = tuple(c.coords) + (Fraction(0),) * (target.rank - c.surface.rank)
    return target.cls(*coords)


def blowup_term(ctx: ModularContext, surface: Surface, L: DivisorClass, H: DivisorClass,
                jobs: int | None = None):
    """chi(M^{Xhat}_{H - eps E}(E, 5), mu(L)), or None when no fibre start exists."""
    if ctx.D < 5:
        raise SeriesError("the blowup term needs a context truncation of at least 5")
    if surface.name == "P2":
        Xh = P2HAT
        E = Xh.basis("E")
    elif surface.name == "P2hat":
        Xh = surface.blowup()
        E = Xh.basis(Xh.labels[-1])
    else:
        return None
    Lh, Hh = _lift_to_blowup(L, Xh), _lift_to_blowup(H, Xh)
    try:
        g = chi_at(ctx, Xh, E, Lh, (Hh, -E), 5, jobs)
    except GeometryError:
        return None
    return g.series[5]


def _concrete_fplus(surface: Surface, L: DivisorClass) -> DivisorClass:
    """A class kF+G with no wall of type (0, <=4) between F and it."""
    F, G = surface.basis("F"), surface.basis("G")
    for k in range(1, 200):
        H = F * k + G
        if not enumerate_walls(surface, surface.zero(), F, H, L, 4, vanishing_filter=False):
            return H
    raise GeometryError("could not find a polarization close to F")


def kdon_convention(ctx: ModularContext, g: GenFun, jobs: int | None = None) -> GenFun:
    """Replace the raw Lambda^4 coefficient by chi(M^{Xhat}_{H-eps E}(E,5), mu(L)).

    Only the Lambda^4 coefficient changes.  Where the blown-up surface has a
    fibre start for c1 = E, that number is computed independently and must
    equal the raw coefficient minus the convention constant.
    """
    if not g.c1.congruent_mod2(g.surface.zero()):
        raise GeometryError("the Lambda^4 convention concerns c1 = 0 only")
    if g.convention != "raw":
        raise GeometryError("series is already in the theorem convention")
    const = convention_constant(g.surface, g.L)
    actual = g.series[4] - const
    routes = dict(g.routes)
    routes["constant"] = actual
    H = None
    if g.surface.name == "P2":
        H = P2.basis("H")
    elif g.surface.name == "P2hat":
        if g.polarization in ("F+",):
            H = _concrete_fplus(g.surface, g.L)
        else:
            try:
                H = parse_class_loose(g.polarization, g.surface)
            except GeometryError:
                H = None
    if H is not None:
        ind = blowup_term(ctx, g.surface, g.L, H, jobs)
        if ind is not None:
            routes["blowup"] = ind
            if ind != actual:
                raise SeriesError(f"Lambda^4 convention mismatch: blowup term {ind}, "
                                  f"raw minus constant {actual}")
    c = dict(g.series.coeffs)
    c[4] = actual
    return GenFun(g.surface, g.c1, g.L, g.polarization, LambdaPoly(c, g.series.D),
                  "theorem", routes)


def parse_class_loose(text: str, surf: Surface) -> DivisorClass:
    from .geometry import parse_class
    return parse_class(text, surf, allow_half=True)


# ---------------------------------------------------------------------------
# blowup polynomials

lam_sym, x_sym = sympy.symbols("lambda x")


@dataclass(frozen=True)
class BlowupPoly:
    n: int
    R: sympy.Expr
    S: sympy.Expr


_GENS = (lam_sym, x_sym)
_BLOWUP_R = [sympy.Poly(1, *_GENS, domain="ZZ"), sympy.Poly(1, *_GENS, domain="ZZ")]
_BLOWUP_S = [sympy.Poly(0, *_GENS, domain="ZZ"), sympy.Poly(lam_sym, *_GENS, domain="ZZ"),
             sympy.Poly(lam_sym * x_sym, *_GENS, domain="ZZ")]
_LAM2 = sympy.Poly(lam_sym ** 2, *_GENS, domain="ZZ")


def _exact_div(num, den, what):
    q, r = num.div(den)
    if not r.is_zero:
        raise SeriesError(f"{what}: division leaves the remainder {r.as_expr()}")
    return q


def blowup_poly(n: int, maximum: int = 12) -> BlowupPoly:
    """R_n and S_n from the quadratic recursions, with exact division checked.

    R_{-n} = R_n and S_{-n} = S_n.
    """
    if abs(n) > maximum:
        raise SeriesError(f"|n| = {abs(n)} exceeds the configured maximum {maximum}")
    n = abs(n)
    lam = _LAM2
    R, S = _BLOWUP_R, _BLOWUP_S
    while len(R) <= n or len(S) <= n:
        # R_{k+1} needs S_k and S_{k+1} needs R_k, so the lists grow in turn
        if len(R) < len(S):
            k = len(R) - 1
            R.append(_exact_div(R[k] ** 2 - lam * S[k] ** 2, R[k - 1], f"R_{k + 1}"))
        else:
            k = len(S) - 1
            S.append(_exact_div(S[k] ** 2 - lam * R[k] ** 2, S[k - 1], f"S_{k + 1}"))
    return BlowupPoly(n, R[n].as_expr(), S[n].as_expr())


def _eval_poly(expr, lam_series: BiSeries, M: BiSeries, D: int) -> BiSeries:
    poly = sympy.Poly(expr, lam_sym, x_sym)
    powers = {0: BiSeries.one(D)}
    out = BiSeries.zero(D)
    for (i, j), c in poly.terms():
        if j not in powers:
            p = powers[max(powers)]
            for t in range(max(powers) + 1, j + 1):
                p = (p * M).truncate(D)
                powers[t] = p
        term = powers[j].shift_lambda(i).truncate(D).scale(Fraction(int(c.p), int(c.q)))
        out = out + term
    return out


def _first_diff(a: BiSeries, b: BiSeries, D: int):
    diff = (a - b).truncate(D)
    for (d, k), c in diff.terms():
        return {"d": d, "k": k, "expected": str(b[d, k]), "got": str(a[d, k])}
    return None


def verify_blowup_identity(ctx: ModularContext, n: int, D: int) -> dict:
    """Compare R_n(Lambda, M), S_n(Lambda, M) with the normalized theta quotients."""
    if D > ctx.D:
        raise SeriesError(f"D={D} exceeds the context truncation {ctx.D}")
    bp = blowup_poly(n)
    lam = BiSeries.lam(D)
    M = ctx.M.truncate(D)
    norm = ctx.power_of_theta4h(-n * n).truncate(D)
    Rt = (ctx.theta_of_h("tilde4", n).truncate(D) * norm).truncate(D)
    if n == 0:
        St = BiSeries.zero(D)
    else:
        St = (ctx.theta_of_h("tilde1", n).truncate(D) * norm).truncate(D)
    sign = -1 if n < 0 else 1
    Rp = _eval_poly(bp.R, lam, M, D)
    Sp = _eval_poly(bp.S, lam, M, D).scale(sign)
    r_bad = _first_diff(Rt, Rp, D)
    s_bad = _first_diff(St, Sp, D)
    return {"n": n, "D": D, "R": r_bad is None, "S": s_bad is None,
            "first_mismatch": r_bad or s_bad, "ok": r_bad is None and s_bad is None}


# ---------------------------------------------------------------------------
# closed forms


_LAMBDA_NAMES = {"L", "Lambda", "Λ", "lam"}


def closed_form(spec: str, d_max: int) -> LambdaPoly:
    """Expand a rational expression in Lambda, e.g. ``(1+L^8)/(1-L^4)^10 - 1 - 19*L^4``."""
    text = spec.replace("^", "**").replace("Λ", "L").replace("·", "*")
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError:
        raise SeriesError(f"malformed closed form {spec!r}") from None

    def const_int(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return node.value
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = const_int(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub, ast.Mult)):
            a, b = const_int(node.left), const_int(node.right)
            return a + b if isinstance(node.op, ast.Add) else a - b if isinstance(node.op, ast.Sub) \
                else a * b
        raise SeriesError(f"exponents must be integers in {spec!r}")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return LambdaPoly({0: node.value}, d_max)
        if isinstance(node, ast.Name) and node.id in _LAMBDA_NAMES:
            return LambdaPoly({1: 1}, d_max)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                return ev(node.left) ** const_int(node.right)
            a, b = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if isinstance(node.op, ast.Div):
                if set(b.coeffs) == {0}:
                    return a.scale(1 / b.coeffs[0])
                return a / b
        raise SeriesError(f"unsupported syntax in closed form {spec!r}")

    return ev(tree).truncate(d_max)


def strange_duality_dims(c2_max: int = 10):
    """(c2, coefficient of Lambda^(4 c2 - 1) in Lambda^3/(1-Lambda^4)^6, C(c2+4, 5))."""
    series = closed_form("L^3/(1-L^4)^6", 4 * c2_max - 1)
    return [(c, series[4 * c - 1], math.comb(c + 4, 5)) for c in range(1, c2_max + 1)]
