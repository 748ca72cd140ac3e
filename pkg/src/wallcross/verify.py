"""Verification suites: each check compares computed coefficients with stated values.

A report is a plain dict, so that the CLI can print it as a table or JSON:

    {"suite": ..., "ok": bool, "checks": [{"name", "ok", "seconds", "failure"}]}

``failure`` is ``None`` or ``{"d", "k", "expected", "got"}`` for the first
differing coefficient (``k`` is the q exponent, ``None`` for pure Lambda series).
"""

from __future__ import annotations

import random
import time
from fractions import Fraction

import sympy

from .crossing import delta
from .geometry import GeometryError, parse_class, surface
from .invariants import (blowdown_p2, blowup_poly, chi_at, closed_form, kdon_convention, lam_sym,
                         strange_duality_dims, verify_blowup_identity, x_sym)
from .lpoly import LambdaPoly
from .modular import context_for, nullwerte
from .series import BiSeries, GaussianRational, SeriesError, rational_str

SUITES = ("modular", "walls", "p11t", "P22", "blowup", "theth", "dims")

I = GaussianRational(0, 1)


def _fmt(x):
    if isinstance(x, Fraction):
        return rational_str(x)
    if isinstance(x, GaussianRational):
        return str(x)
    return str(x)


def _failure(d, k, expected, got):
    return {"d": d, "k": k, "expected": _fmt(expected), "got": _fmt(got)}


class _Suite:
    def __init__(self, name: str):
        self.name = name
        self.checks = []

    def add(self, name: str, failure=None, seconds: float = 0.0, ok=None, **extra):
        rec = {"name": name, "ok": failure is None if ok is None else ok,
               "seconds": round(seconds, 3), "failure": failure}
        rec.update(extra)
        self.checks.append(rec)
        return rec

    def poly(self, name: str, got: LambdaPoly, expected: LambdaPoly, D: int, t0: float, **extra):
        mism = got.first_mismatch(expected, D)
        fail = None if mism is None else _failure(mism[0], None, mism[1], mism[2])
        return self.add(name, fail, time.perf_counter() - t0, **extra)

    def report(self) -> dict:
        return {"suite": self.name, "ok": all(c["ok"] for c in self.checks), "checks": self.checks}


def _compare_terms(got: dict, expected: dict):
    """First (d, k) where two {(d, k): coefficient} maps differ."""
    for key in sorted(set(got) | set(expected)):
        a = GaussianRational.coerce(expected.get(key, 0))
        b = GaussianRational.coerce(got.get(key, 0))
        if a != b:
            return _failure(key[0], key[1], a, b)
    return None


def _terms_upto(s: BiSeries, k_max: int, D: int) -> dict:
    """Every monomial Lambda^d q^k of ``s`` with d <= D and k <= k_max."""
    out = {}
    for d in range(s.low, min(D, s.D) + 1):
        r = s.row(d)
        if r.mv < k_max:
            raise SeriesError(f"q^{k_max} of Lambda^{d} is outside the window")
        for k, c in r.items():
            if k <= k_max:
                out[(d, k)] = c
    return out


# ---------------------------------------------------------------------------


def suite_modular(d_max: int = 24, q_margin: int = 4) -> dict:
    S = _Suite("modular")
    t0 = time.perf_counter()
    t2, t3, t4 = nullwerte(64)
    diff = t2 ** 4 + t4 ** 4 - t3 ** 4
    fail = None
    if not diff.is_zero():
        k = diff.lo
        fail = _failure(None, k, 0, diff[k])
    S.add("jacobi identity through q^64", fail, time.perf_counter() - t0)

    t0 = time.perf_counter()
    ctx = context_for(max(d_max, 5), q_margin)
    S.add("context build", None, time.perf_counter() - t0, D=ctx.D, W=ctx.W)

    t0 = time.perf_counter()
    u4 = ctx.u.shift(2).scale(4)
    exp = {(0, 4 * j): c for j, c in enumerate((-1, -20, 62, -216, 641))}
    got = {(0, k): u4[k] for (_, k) in exp}
    S.add("4q^2 u coefficients", _compare_terms(got, exp), time.perf_counter() - t0)

    def printed(name, series, table):
        t = time.perf_counter()
        exp = {key: I * Fraction(c) for key, c in table.items()}
        got = {key: series[key] for key in table}
        S.add(name, _compare_terms(got, exp), time.perf_counter() - t)

    printed("h leading coefficients", ctx.h,
            {(1, -1): 1, (1, 3): -2, (1, 7): 3,
             (3, -3): Fraction(1, 24), (3, 1): Fraction(3, 4), (3, 5): Fraction(-33, 8)})
    printed("zeta leading coefficients", ctx.zeta,
            {(1, -1): 1, (1, 3): -2, (1, 7): 3, (3, 1): 1, (3, 5): -5, (5, 3): 2, (5, 7): -17})

    for key, ok in ctx.checks().items():
        t = time.perf_counter()
        S.add(f"identity {key} through Lambda^{ctx.D}", None if ok else
              _failure(None, None, "0", "nonzero"), time.perf_counter() - t)
    return S.report()


# ---------------------------------------------------------------------------


def _theth_items(ctx, D: int):
    lam4 = BiSeries.lam(D, 4)
    one = BiSeries.one(D)
    base = (ctx.hstar.shift_lambda(2) * BiSeries.from_rows([ctx.uprime], D)).truncate(D)
    t4 = ctx.theta4h.truncate(D)
    p = lambda e: ctx.power_of_theta4h(e).truncate(D)
    m = one - lam4
    h = Fraction(1, 2)
    k = lambda kind, a: ctx.kernel(kind, a).truncate(D)
    return {
        2: k("coth", 1) * base * (-h),
        3: k("csch", 2) * (p(4) * m - one) * base * h,
        4: k("coth", 2) * (p(4) * m - one) * base * (-h),
        5: k("coth", 3) * (p(3) * m - one) * base * (-h),
        6: k("tanh", 2) * (p(8) * m * m * m - (one + lam4)) * base * (-h),
    }, t4


_THETH = {
    2: {(2, -2): Fraction(-1, 2), (4, 0): -1},
    3: {(4, 0): 1},
    4: {(4, 0): -1, (6, -2): Fraction(1, 2), (8, 0): 3},
    5: {(4, 0): Fraction(-1, 2), (6, -2): Fraction(1, 2), (8, 0): Fraction(5, 2)},
    6: {(6, -2): 2, (8, 0): 13, (10, -2): Fraction(-3, 2), (12, 0): -14,
        (14, -2): Fraction(1, 2), (16, 0): 5},
}


def suite_theth(d_max: int = 24, q_margin: int = 4) -> dict:
    S = _Suite("theth")
    D = max(d_max, 18)  # item 6 reaches Lambda^16
    ctx = context_for(D, q_margin)
    t0 = time.perf_counter()
    items, t4 = _theth_items(ctx, D)
    # item (1): theta~_4(h) = 1 + q^2 Lambda^2 + O(q^3); the q^3 part is recorded
    got = _terms_upto(t4, 2, D)
    q3 = {f"L^{d} q^{k}": _fmt(c) for (d, k), c in sorted(_terms_upto(t4, 3, D).items())
          if k == 3}
    S.add("item 1", _compare_terms(got, {(0, 0): 1, (2, 2): 1}), time.perf_counter() - t0,
          q3_terms=q3)
    for n, series in items.items():
        t = time.perf_counter()
        S.add(f"item {n}", _compare_terms(_terms_upto(series, 0, D), _THETH[n]),
              time.perf_counter() - t)
    return S.report()


# ---------------------------------------------------------------------------


DELTA_2E = {"H": "L^4", "H-E": "2*L^4-18*L^8", "2H": "L^4", "2H-E": "2*L^4-27*L^8",
            "3H-E": "2*L^4-38*L^8"}
DELTA_E_L = ("0", "F", "G", "F+G", "2F+G", "F-G")


def random_walls(name: str, count: int, seed: int = 0, max_neg_square: int = 12):
    """Admissible (xi, L) pairs: xi^2 < 0, <xi, L> even, N = <xi, L-K> small."""
    X = surface(name)
    rng = random.Random(f"{name}-{seed}")
    out, seen = [], set()
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > 100000:
            raise GeometryError(f"could not draw {count} walls on {name}")
        xi = X.cls(*[rng.randint(-4, 4) for _ in range(X.rank)])
        L = X.cls(*[rng.randint(-3, 3) for _ in range(X.rank)])
        sq = xi.square
        if not (-max_neg_square <= sq < 0) or xi.pair(L) % 2:
            continue
        if abs(xi.pair(L - X.K)) > 12:
            continue
        key = (xi.coords, L.coords)
        if key in seen:
            continue
        seen.add(key)
        out.append((xi, L))
    return out


def wall_property_failures(ctx, X, xi, L, d_max: int) -> list:
    bar = delta(ctx, X, xi, L, d_max)
    full = delta(ctx, X, xi, L, d_max, path="full")
    bad = bar.violations()
    mism = bar.delta.first_mismatch(full.delta)
    if mism is not None:
        bad.append(f"Delta and Delta-bar differ at Lambda^{mism[0]}")
    return bad


def suite_walls(d_max: int = 24, q_margin: int = 4, samples: int = 50) -> dict:
    S = _Suite("walls")
    ctx = context_for(d_max, q_margin)
    X = surface("P2hat")
    for Ltxt, target in DELTA_2E.items():
        t0 = time.perf_counter()
        got = delta(ctx, X, parse_class("2E", X), parse_class(Ltxt, X), d_max).delta
        S.poly(f"delta_2E(P2hat, {Ltxt})", got, closed_form(target, d_max), d_max, t0)
    B, P = surface("Bl1P1xP1"), surface("P1xP1")
    for Ltxt in DELTA_E_L:
        t0 = time.perf_counter()
        LX = parse_class(Ltxt, P)
        c = -2 * P.K.pair(LX) + P.K.square + LX.square + 2
        got = delta(ctx, B, parse_class("E", B), parse_class(Ltxt, B), d_max).delta
        S.poly(f"delta_E(Bl1P1xP1, {Ltxt})", got, LambdaPoly({5: c}, d_max), d_max, t0)
    D = min(d_max, 16)
    wctx = context_for(D, q_margin)
    for name in ("P1xP1", "P2hat", "Bl1P1xP1", "Bl2P2"):
        t0 = time.perf_counter()
        problems = []
        for xi, L in random_walls(name, samples):
            bad = wall_property_failures(wctx, xi.surface, xi, L, D)
            if bad:
                problems.append(f"xi={xi}, L={L}: {'; '.join(bad)}")
        S.add(f"properties of {samples} random walls on {name}",
              None if not problems else {"d": None, "k": None, "expected": "no violation",
                                         "got": problems[0]},
              time.perf_counter() - t0, ok=not problems)
    return S.report()


# ---------------------------------------------------------------------------


def theorem_polarization(X, n):
    """aF + bG with a/b slightly above (n+2)/4 and gcd(a, b) = 1."""
    F, G = X.basis("F"), X.basis("G")
    a = 16 * (Fraction(n) + 2) + 1
    return F * a + G * 64


P11T_FAMILIES = {
    # label: (c1, m, generating function minus its constant term)
    "1F": ("F", 0, "1/(1-L^4)^({n}+1) - 1"),
    "10": ("0", 0, "1/(1-L^4)^({n}+1) - 1"),
    "2": ("0", 1, "1/(1-L^4)^({t}) - 1"),
    "3F": ("F", 2, "((1+L^4)^{n}-(1-L^4)^{n})/2/(1-L^4)^({n3})"),
    "30": ("0", 2, "((1+L^4)^{n}+(1-L^4)^{n})/2/(1-L^4)^({n3}) - 1"),
}


def p11t_cases():
    out = []
    for name in ("P1xP1", "P2hat"):
        for n in range(0, 7):
            out += [(name, "1F", n), (name, "10", n)]
        ns = range(0, 5) if name == "P1xP1" else [Fraction(2 * j + 1, 2) for j in range(0, 4)]
        out += [(name, "2", n) for n in ns]
        for n in range(0, 5):
            out += [(name, "3F", n), (name, "30", n)]
    return out


def p11t_check(ctx, name: str, fam: str, n, d_max: int, jobs=None):
    """(computed theorem-convention series, expected closed form)."""
    X = surface(name)
    c1txt, m, form = P11T_FAMILIES[fam]
    F, G = X.basis("F"), X.basis("G")
    c1 = X.zero() if c1txt == "0" else F
    L = F * n + G * m
    g = chi_at(ctx, X, c1, L, theorem_polarization(X, n), d_max, jobs)
    if c1txt == "0":
        g = kdon_convention(ctx, g, jobs)
    t = 2 * Fraction(n) + 2
    expr = form.format(n=n, t=int(t), n3=3 * n + 3)
    return g, closed_form(expr, d_max)


def suite_p11t(d_max: int = 21, q_margin: int = 4, jobs=None) -> dict:
    S = _Suite("p11t")
    D = d_max
    ctx = context_for(max(D, 5), q_margin)
    for name, fam, n in p11t_cases():
        t0 = time.perf_counter()
        g, expected = p11t_check(ctx, name, fam, n, D, jobs)
        routes = {k: _fmt(v) for k, v in g.routes.items()}
        S.poly(f"{name} family {fam} n={_fmt(Fraction(n))}", g.series, expected, D, t0,
               routes=routes)
    return S.report()


# ---------------------------------------------------------------------------


P22_RAW = {("0", 1): "1/(1-L^4)^3-1-9*L^4", ("0", 2): "1/(1-L^4)^6-1-27/2*L^4",
           ("H", 2): "L^3/(1-L^4)^6", ("0", 3): "(1+L^8)/(1-L^4)^10-1-19*L^4"}
P22_THEOREM = {("0", 1): "1/(1-L^4)^3-1", ("0", 2): "1/(1-L^4)^6-1",
               ("H", 2): "L^3/(1-L^4)^6", ("0", 3): "(1+L^8)/(1-L^4)^10-1"}


def p22_series(ctx, c1: str, k: int, d_max: int, jobs=None):
    g = blowdown_p2(ctx, c1, k, d_max, jobs)
    return g, (kdon_convention(ctx, g, jobs) if c1 == "0" else g)


def suite_P22(d_max: int = 19, q_margin: int = 4, jobs=None) -> dict:
    S = _Suite("P22")
    D = d_max
    ctx = context_for(max(D, 5), q_margin)
    for (c1, k), form in P22_THEOREM.items():
        t0 = time.perf_counter()
        raw, th = p22_series(ctx, c1, k, D, jobs)
        S.poly(f"P2 c1={c1} L={k}H raw", raw.series, closed_form(P22_RAW[(c1, k)], D), D, t0)
        t0 = time.perf_counter()
        mism = raw.routes["on-wall"].first_mismatch(raw.routes["blowdown"], D)
        S.add(f"P2 c1={c1} L={k}H routes agree",
              None if mism is None else _failure(mism[0], None, mism[1], mism[2]),
              time.perf_counter() - t0)
        t0 = time.perf_counter()
        S.poly(f"P2 c1={c1} L={k}H theorem", th.series, closed_form(form, D), D, t0,
               routes={a: _fmt(b) for a, b in th.routes.items()
                       if a in ("constant", "blowup")})
    return S.report()


# ---------------------------------------------------------------------------


def suite_blowup(d_max: int = 12, q_margin: int = 4, n_max: int = 12) -> dict:
    S = _Suite("blowup")
    for n in range(-n_max, n_max + 1):
        t0 = time.perf_counter()
        try:
            blowup_poly(n, maximum=n_max)
            fail = None
        except SeriesError as exc:
            fail = {"d": None, "k": None, "expected": "exact division", "got": str(exc)}
        S.add(f"R_{n}, S_{n} exact division", fail, time.perf_counter() - t0)
    lam, x = lam_sym, x_sym
    printed = {
        "R_3": (blowup_poly(3).R, -lam ** 4 * x ** 2 + (1 - lam ** 4) ** 2),
        "S_3": (blowup_poly(3).S, lam * (x ** 2 - (1 - lam ** 4) ** 2)),
        "S_4": (blowup_poly(4).S, lam * x * ((1 - lam ** 8) * x ** 2 - 2 * (1 - lam ** 4) ** 3)),
    }
    for name, (a, b) in printed.items():
        diff = sympy.expand(a - b)
        S.add(f"{name} closed form", None if diff == 0 else
              {"d": None, "k": None, "expected": str(sympy.expand(b)), "got": str(sympy.expand(a))})
    D = d_max
    ctx = context_for(D, q_margin)
    for n in range(-4, 5):
        t0 = time.perf_counter()
        rep = verify_blowup_identity(ctx, n, D)
        fail = None if rep["ok"] else rep["first_mismatch"]
        S.add(f"theta quotients for n={n} through Lambda^{D}", fail, time.perf_counter() - t0)
    return S.report()


# ---------------------------------------------------------------------------


def suite_dims(d_max: int = 24, q_margin: int = 4) -> dict:
    S = _Suite("dims")
    for c2, coeff, binom in strange_duality_dims(10):
        fail = None if coeff == binom else _failure(4 * c2 - 1, None, binom, coeff)
        S.add(f"c2={c2}", fail)
    return S.report()


_RUNNERS = {
    "modular": suite_modular, "walls": suite_walls, "p11t": suite_p11t, "P22": suite_P22,
    "blowup": suite_blowup, "theth": suite_theth, "dims": suite_dims,
}

_DEFAULT_D = {"p11t": 21, "P22": 19, "blowup": 12, "theth": 16}


def run_verify(suite: str, d_max: int | None = None, q_margin: int = 4, jobs=None) -> dict:
    """Run one suite (or ``all``) and return the combined report."""
    if suite == "all":
        reps = [run_verify(s, d_max, q_margin, jobs) for s in SUITES]
        return {"suite": "all", "ok": all(r["ok"] for r in reps), "suites": reps}
    if suite not in _RUNNERS:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)} or all")
    D = d_max if d_max is not None else _DEFAULT_D.get(suite, 24)
    fn = _RUNNERS[suite]
    kwargs = {"d_max": D, "q_margin": q_margin}
    if suite in ("p11t", "P22"):
        kwargs["jobs"] = jobs
    t0 = time.perf_counter()
    rep = fn(**kwargs)
    rep["seconds"] = round(time.perf_counter() - t0, 3)
    return rep
