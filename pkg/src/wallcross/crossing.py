"""Wallcrossing terms delta_xi(L) and their sums between polarizations."""

from __future__ import annotations

import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .geometry import (DivisorClass, GeometryError, Surface, WallClass, enumerate_walls,
                       make_wall, walls_on)
from .lpoly import LambdaPoly
from .modular import ModularContext, build_context
from .series import INF, BiSeries, GaussianRational, QLaurent, SeriesError, WindowError


@dataclass(frozen=True)
class WallContribution:
    xi: WallClass
    delta: LambdaPoly
    support: tuple

    def violations(self) -> list:
        """Broken structural properties (empty when all hold)."""
        bad = []
        sq = self.xi.square
        lo, hi = -sq, sq + 2 * abs(self.xi.N) + 4
        for d, c in self.delta.items():
            if (d + sq) % 4:
                bad.append(f"Lambda^{d} has the wrong residue mod 4")
            if d < lo or d > hi:
                bad.append(f"Lambda^{d} lies outside [{lo}, {hi}]")
        if -sq > abs(self.xi.N) + 2 and self.delta.coeffs:
            bad.append("nonzero although -xi^2 > |N| + 2")
        return bad


def core_series(ctx: ModularContext, e: int, sigma: int) -> BiSeries:
    """Lambda^2 u' h* theta~_4(h)^e theta_4^sigma, shared by every kernel."""

    def build():
        D = ctx.D
        base = ctx._memoized(("core0", sigma), lambda: _core0(ctx, sigma))
        return base * ctx.power_of_theta4h(e)

    return ctx._memoized(("core", e, sigma), build)


def _core0(ctx: ModularContext, sigma: int) -> BiSeries:
    f = ctx.uprime
    if sigma > 0:
        f = f * ctx.theta4 ** sigma
    elif sigma < 0:
        f = f * (ctx.theta4 ** (-sigma)).inverse()
    return ctx.hstar.shift_lambda(2).truncate(ctx.D) * f


def product_upto(a: BiSeries, b: BiSeries, top: int) -> BiSeries:
    """a*b, computing each Lambda row only through q**top."""
    la = [r.lo for r in a.rows if r.re]
    lb = [r.lo for r in b.rows if r.re]
    if not la or not lb:
        return a * b
    ca, cb = top - min(lb), top - min(la)
    return a.cap_windows(lambda d: ca) * b.cap_windows(lambda d: cb)


def _pair_int(a: DivisorClass, b: DivisorClass, what: str) -> int:
    v = a.pair(b)
    if v.denominator != 1:
        raise GeometryError(f"{what} is not an integer")
    return int(v)


def delta_bar_series(ctx: ModularContext, surface: Surface, xi: DivisorClass, L: DivisorClass,
                     q_top: int | None = None) -> BiSeries:
    """The antisymmetrized integrand whose q^0 coefficient is delta_xi(L).

    With ``q_top`` the rows are computed only through q**q_top (after the
    q^(-xi^2) shift), which is all that the q^0 extraction needs.
    """
    K = surface.K
    if _pair_int(xi, L, "<xi, L>") % 2:
        raise GeometryError(f"<xi, L> is odd for xi={xi}, L={L}")
    N = _pair_int(xi, L - K, "<xi, L-K>")
    sq = _pair_int(xi, xi, "xi^2")
    if N == 0:
        return BiSeries.zero(ctx.D)
    e = _pair_int(L - K, L - K, "(L-K)^2")
    core = core_series(ctx, e, surface.signature)
    kern = ctx.kernel("sinh" if N % 2 == 0 else "cosh", N)
    prod = kern * core if q_top is None else product_upto(kern, core, q_top + sq)
    unit = GaussianRational.i_power(_pair_int(xi, K, "<xi, K>")) * 2
    return prod.shift_q(-sq).scale(unit)


def delta_full_series(ctx: ModularContext, surface: Surface, xi: DivisorClass, L: DivisorClass,
                      q_top: int | None = None) -> BiSeries:
    """The unsymmetrized integrand 2 i^<xi,K> Lambda^2 q^(-xi^2) y^N (...)."""
    K = surface.K
    N = _pair_int(xi, L - K, "<xi, L-K>")
    sq = _pair_int(xi, xi, "xi^2")
    e = _pair_int(L - K, L - K, "(L-K)^2")
    core = core_series(ctx, e, surface.signature)
    yN = ctx._memoized(("ypow", N), lambda: ctx.exp_multiple(N))
    prod = yN * core if q_top is None else product_upto(yN, core, q_top + sq)
    unit = GaussianRational.i_power(_pair_int(xi, K, "<xi, K>")) * 2
    return prod.shift_q(-sq).scale(unit)


_CACHE = {}
_CACHE_LOCK = threading.Lock()


def _extract(series: BiSeries, d_max: int) -> LambdaPoly:
    out = {}
    for d, c in series.coeff_q0(d_max).items():
        if not c.is_real():
            raise SeriesError(f"wallcrossing term has a non-real coefficient at Lambda^{d}")
        if c.re:
            out[d] = c.re
    return LambdaPoly(out, d_max)


def delta(ctx: ModularContext, surface: Surface, xi, L: DivisorClass, d_max: int,
          path: str = "bar") -> WallContribution:
    """delta_xi(L) through Lambda^d_max, from the symmetrized (``bar``) or plain integrand."""
    wall = xi if isinstance(xi, WallClass) else make_wall(xi, L, d_max)
    if path not in ("bar", "full"):
        raise SeriesError(f"unknown path {path!r}")
    if d_max > ctx.D:
        raise SeriesError(f"d_max={d_max} exceeds the context truncation {ctx.D}")
    key = (surface.name, wall.xi.coords, L.coords, d_max, ctx.D, ctx.W, path)
    with _CACHE_LOCK:
        hit = _CACHE.get(key)
    if hit is not None:
        return hit
    fn = delta_bar_series if path == "bar" else delta_full_series
    c = ctx
    for attempt in range(2):
        try:
            poly = _extract(fn(c, surface, wall.xi, L, q_top=0).truncate(d_max), d_max)
            break
        except WindowError:
            if attempt:
                raise
            c = build_context(ctx.D, 2 * ctx.W)
    sq = wall.square
    res = WallContribution(wall, poly, (-sq, sq + 2 * abs(wall.N) + 4))
    with _CACHE_LOCK:
        _CACHE.setdefault(key, res)
    return res


def default_jobs() -> int:
    return os.cpu_count() or 1


def crossing_terms(surface: Surface, c1: DivisorClass, L: DivisorClass, H_from: DivisorClass,
                   H_to: DivisorClass, d_max: int, average: bool = True,
                   vanishing_filter: bool = True) -> list:
    """(weight, WallClass) pairs whose weighted deltas give chi^H_to - chi^H_from.

    Walls strictly between the endpoints have weight 1.  With ``average`` the
    walls through an endpoint enter with weight 1/2, which yields the on-wall
    value at that endpoint.
    """
    out = [(Fraction(1), w) for w in enumerate_walls(surface, c1, H_from, H_to, L, d_max,
                                                     vanishing_filter=vanishing_filter)]
    if average:
        half = Fraction(1, 2)
        for w in _through(surface, c1, H_to, L, d_max, vanishing_filter):
            if w.xi.pair(H_from) < 0:
                out.append((half, w))
        for w in _through(surface, c1, H_from, L, d_max, vanishing_filter):
            if w.xi.pair(H_to) > 0:
                out.append((half, w))
    return out


def _through(surface, c1, H, L, d_max, vanishing_filter):
    if H.square == 0:
        if surface.rank <= 2:
            return []  # classes orthogonal to an isotropic class are not walls
        if c1.pair(H) % 2:
            return []  # <xi, H> is odd for every xi = c1 mod 2
        raise GeometryError(f"{H} is isotropic: the walls through it are not finite in number")
    return walls_on(surface, c1, H, L, d_max, vanishing_filter=vanishing_filter)


def sum_terms(ctx: ModularContext, surface: Surface, L: DivisorClass, terms: list, d_max: int,
              jobs: int | None = None) -> LambdaPoly:
    total = LambdaPoly({}, d_max)
    if not terms:
        return total
    jobs = jobs or default_jobs()

    def one(t):
        return t[0], delta(ctx, surface, t[1], L, d_max)

    if jobs > 1 and len(terms) > 1:
        with ThreadPoolExecutor(max_workers=min(jobs, len(terms))) as pool:
            results = list(pool.map(one, terms))
    else:
        results = [one(t) for t in terms]
    for wgt, contrib in results:
        total = total + contrib.delta.scale(wgt)
    return total


def wall_sum(ctx: ModularContext, surface: Surface, c1: DivisorClass, L: DivisorClass,
             H_from: DivisorClass, H_to: DivisorClass, d_max: int, average: bool = True,
             jobs: int | None = None) -> LambdaPoly:
    """chi^{H_to} - chi^{H_from} through Lambda^d_max (on-wall endpoints averaged)."""
    terms = crossing_terms(surface, c1, L, H_from, H_to, d_max, average=average)
    return sum_terms(ctx, surface, L, terms, d_max, jobs)


def tie_break_correction(ctx: ModularContext, surface: Surface, c1: DivisorClass,
                         L: DivisorClass, H: DivisorClass, v: DivisorClass, d_max: int,
                         jobs: int | None = None) -> LambdaPoly:
    """chi^{H + eps v} - chi^H for small eps > 0, with chi^H the on-wall value."""
    ws = walls_on(surface, c1, H, L, d_max, toward=-v)
    return sum_terms(ctx, surface, L, [(Fraction(1, 2), w) for w in ws], d_max, jobs)
