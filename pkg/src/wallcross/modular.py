"""Theta functions, u, h and the elliptic kernels as series in (q, Lambda).

Conventions: ``q = exp(pi i tau / 4)`` and ``y = exp(h/2)``.  The elliptic
variable ``h`` is the inverse of ``Lambda = theta_1(h)/theta_4(h)`` and is
built from its closed double-sum expansion; ``Lambda`` is then recovered from
the theta quotient as a consistency check.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction

from .series import INF, BiSeries, GaussianRational, QLaurent, SeriesError, WindowError

I = GaussianRational(0, 1)

KINDS = ("sinh", "cosh", "coth", "tanh", "csch")
SERIES_NAMES = ("u", "h", "hstar", "uprime", "zeta", "M", "theta4h", "theta1h")


def default_window(D: int) -> int:
    return 4 * D + 8


def nullwerte(W: int):
    """theta_2, theta_3, theta_4 at h = 0, exact through q**W."""
    t2, t3, t4 = {}, {0: 1}, {0: 1}
    n = 0
    while (2 * n + 1) ** 2 <= W:
        t2[(2 * n + 1) ** 2] = 2
        n += 1
    n = 1
    while 4 * n * n <= W:
        t3[4 * n * n] = 2
        t4[4 * n * n] = 2 * (-1) ** n
        n += 1
    return (QLaurent.from_coeffs(t2, W), QLaurent.from_coeffs(t3, W),
            QLaurent.from_coeffs(t4, W))


def _binom(a: Fraction, k: int) -> Fraction:
    out = Fraction(1)
    for j in range(k):
        out = out * (a - j) / (j + 1)
    return out


class ModularContext:
    """All named series for one choice of (D, W), plus memoized kernels.

    Instances are immutable apart from the kernel memo, which is guarded by a
    lock so that concurrent readers only ever see complete entries.
    """

    def __init__(self, D: int, W: int | None = None, check: bool = True):
        if D < 1:
            raise SeriesError("Lambda truncation must be at least 1")
        if W is None:
            W = default_window(D)
        if W < 4 * D + 4:
            raise SeriesError(f"q-window W={W} is below 4D+4={4 * D + 4}")
        self.D = D
        self.W = W
        self._memo = {}
        self._lock = threading.Lock()

        t2, t3, t4 = nullwerte(W)
        self.theta2, self.theta3, self.theta4 = t2, t3, t4
        t23 = t2 * t3
        inv23 = t23.inverse()
        s2, s3 = t2 * t2, t3 * t3
        self.u = -(s2 * s3.inverse() + s3 * s2.inverse())
        self.uprime = self.u.derive()
        self.uprime_closed = (t4 ** 8).scale(2) * (s2 * s3).inverse()

        # h from the double sum; row d collects k = (4n+1-d)/2
        upow = [QLaurent.monomial(0)]
        rows = [QLaurent.zero()]
        pref = inv23.scale(2 * I)
        for d in range(1, D + 1):
            if d % 2 == 0:
                rows.append(QLaurent.zero())
                continue
            acc = None
            for n in range((d - 1 + 3) // 4, (d - 1) // 2 + 1):
                k = (4 * n + 1 - d) // 2
                if k < 0 or k > n:
                    continue
                while len(upow) <= k:
                    upow.append(upow[-1] * self.u)
                c = _binom(Fraction(-1, 2), n) * math.comb(n, k) / d
                term = upow[k].scale(c)
                acc = term if acc is None else acc + term
            rows.append(pref * acc)
        self.h = BiSeries.from_rows(rows, D)

        lam = BiSeries.lam(D)
        self.M = (BiSeries.from_rows([QLaurent.zero(), QLaurent.zero(), self.u], D)
                  + BiSeries.lam(D, 4)).sqrt_one_plus().scale(2)
        self.hstar = (lam * self.M.invert()) * inv23.scale(4 * I)

        # P_k = h^k / k!, the building blocks of every exponential kernel
        powers = [BiSeries.one(D)]
        p = BiSeries.one(D)
        for k in range(1, D + 1):
            p = (p * self.h).truncate(D).scale(Fraction(1, k))
            powers.append(p)
        self.powers = powers

        self.y = self.exp_multiple(1)
        self.yinv = self.exp_multiple(-1)
        self.zeta = self.kernel("sinh", 1).scale(2)
        self.theta4h = self.theta_of_h("tilde4", 1)
        self.theta1h = self.theta_of_h("tilde1", 1)
        if check:
            self.self_check()

    # ------------------------------------------------------------------

    def exp_multiple(self, A2: int, parity: int | None = None) -> BiSeries:
        """exp(A2*h/2) from the cached powers; ``parity`` keeps odd/even k only."""
        a = Fraction(A2, 2)
        terms = []
        for k, p in enumerate(self.powers):
            if parity is not None and k % 2 != parity:
                continue
            c = a ** k
            if c:
                terms.append((c, p))
        if not terms:
            return BiSeries.zero(self.D)
        return BiSeries.lincomb(terms)

    def _memoized(self, key, fn):
        with self._lock:
            if key in self._memo:
                return self._memo[key]
        val = fn()
        with self._lock:
            return self._memo.setdefault(key, val)

    def kernel(self, kind: str, A2: int) -> BiSeries:
        """sinh, cosh, coth, tanh or csch of (A2/2)*h."""
        if kind not in KINDS:
            raise SeriesError(f"unknown kernel {kind!r}")
        if A2 == 0 and kind in ("coth", "tanh", "csch"):
            raise SeriesError(f"{kind}(0*h) is singular")
        if kind == "sinh":
            return self._memoized(("sinh", A2), lambda: self.exp_multiple(A2, parity=1))
        if kind == "cosh":
            return self._memoized(("cosh", A2), lambda: self.exp_multiple(A2, parity=0))
        if kind == "csch":
            return self._memoized(("csch", A2), lambda: self.kernel("sinh", A2).invert())
        if kind == "coth":
            return self._memoized(("coth", A2),
                                  lambda: self.kernel("cosh", A2) * self.kernel("csch", A2))
        return self._memoized(("tanh", A2),
                              lambda: self.kernel("sinh", A2) * self.kernel("cosh", A2).invert())

    def _theta_raw(self, which: str, n: int) -> BiSeries:
        """theta_4(nh) or theta_1(nh) (not yet divided by the nullwert)."""
        D, W = self.D, self.W
        # every row d of cosh(m h), sinh(m h) starts at q^-d or later, so a
        # term q^e * kernel is invisible below q^(e-d) on row d
        top = W + D + 1
        terms = []
        if which == "tilde4":
            k = 1
            terms.append((1, BiSeries.one(D)))
            while 4 * k * k <= top:
                terms.append((2 * (-1) ** k, self.kernel("cosh", 2 * k * n).shift_q(4 * k * k)))
                k += 1
            first_missing = 4 * k * k
        else:
            k = 0
            while (2 * k + 1) ** 2 <= top:
                c = GaussianRational(0, -2 * (-1) ** k)
                terms.append((c, self.kernel("sinh", (2 * k + 1) * n).shift_q((2 * k + 1) ** 2)))
                k += 1
            first_missing = (2 * k + 1) ** 2
        s = BiSeries.lincomb(terms)
        return s.cap_windows(lambda d: first_missing - d - 1)

    def theta_of_h(self, which: str, n: int) -> BiSeries:
        """theta~_4(nh) or theta~_1(nh), i.e. theta_i(nh)/theta_4."""
        if which not in ("tilde4", "tilde1"):
            raise SeriesError(f"unknown theta {which!r}")
        if which == "tilde1" and n == 0:
            raise SeriesError("theta~_1(0) vanishes identically")

        def build():
            raw = self._theta_raw(which, n)
            return raw * self.theta4.inverse()

        return self._memoized(("theta", which, n), build)

    def power_of_theta4h(self, e: int) -> BiSeries:
        """theta~_4(h)**e for any integer e."""
        if e == 0:
            return BiSeries.one(self.D)
        if e < 0:
            return self._memoized(("t4pow", e), lambda: self.power_of_theta4h(-e).invert())

        def build():
            if e == 1:
                return self.theta4h
            half = self.power_of_theta4h(e // 2)
            sq = half * half
            return sq * self.theta4h if e % 2 else sq

        return self._memoized(("t4pow", e), build)

    def named(self, name: str) -> BiSeries:
        """Named series for debugging and export."""
        D = self.D
        table = {
            "u": lambda: BiSeries.from_rows([self.u], D),
            "uprime": lambda: BiSeries.from_rows([self.uprime], D),
            "h": lambda: self.h,
            "hstar": lambda: self.hstar,
            "zeta": lambda: self.zeta,
            "M": lambda: self.M,
            "theta4h": lambda: self.theta4h,
            "theta1h": lambda: self.theta1h,
        }
        if name not in table:
            raise SeriesError(f"unknown series {name!r}; choose from {', '.join(SERIES_NAMES)}")
        return table[name]()

    # ------------------------------------------------------------------

    def checks(self) -> dict:
        """Internal identities; each value is True when it holds exactly."""
        D = self.D
        lam = BiSeries.lam(D)
        out = {}
        t2, t3, t4 = self.theta2, self.theta3, self.theta4
        out["jacobi"] = (t2 ** 4 + t4 ** 4 - t3 ** 4).is_zero()
        out["uprime"] = self.uprime.equals(self.uprime_closed)
        m2 = self.M * self.M
        rhs = (BiSeries.from_rows([QLaurent.zero(), QLaurent.zero(), self.u], D)
               + BiSeries.lam(D, 4) + BiSeries.one(D)).scale(4)
        out["M_squared"] = (m2 - rhs).is_zero()
        out["hstar"] = (self.h.derive("lambda_log") - self.hstar).is_zero()
        quotient = self.theta1h * self.theta4h.invert()
        out["lambda"] = (quotient - lam).is_zero()
        return out

    def self_check(self):
        bad = [k for k, v in self.checks().items() if not v]
        if bad:
            raise SeriesError(f"modular self-check failed: {', '.join(bad)}")


_CONTEXTS = {}
_CTX_LOCK = threading.Lock()


def build_context(D: int, W: int | None = None, check: bool = True) -> ModularContext:
    """Shared, memoized context for (D, W)."""
    if W is None:
        W = default_window(D)
    key = (D, W)
    with _CTX_LOCK:
        ctx = _CONTEXTS.get(key)
    if ctx is None:
        ctx = ModularContext(D, W, check=check)
        with _CTX_LOCK:
            ctx = _CONTEXTS.setdefault(key, ctx)
    return ctx


def context_for(D: int, q_margin: int = 4) -> ModularContext:
    """Context whose q-window exceeds the minimal 4D+4 by ``q_margin``."""
    if q_margin < 0:
        raise SeriesError("q_margin must be nonnegative")
    return build_context(D, 4 * D + 4 + q_margin)


def kernel(ctx: ModularContext, kind: str, half_multiple: int) -> BiSeries:
    return ctx.kernel(kind, half_multiple)


def theta_of_h(ctx: ModularContext, which: str, n: int) -> BiSeries:
    return ctx.theta_of_h(which, n)


def power_of_theta4h(ctx: ModularContext, e: int) -> BiSeries:
    return ctx.power_of_theta4h(e)
