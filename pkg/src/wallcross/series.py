"""Exact truncated series in q and Lambda over the Gaussian rationals.

Three layers:

* :class:`GaussianRational` -- an exact element ``re + i*im`` of Q(i).
* :class:`QLaurent` -- a Laurent series in q known exactly through the
  exponent ``max_valid``.  Every arithmetic result carries an honest window;
  asking for a coefficient above it raises :class:`WindowError`.
* :class:`BiSeries` -- a power series in Lambda (rows ``low..D``) whose
  coefficients are :class:`QLaurent` objects, each with its own window.

Numerators are stored as Python ints over one positive denominator per row so
that products can go through the Kronecker substitution in ``_kron``.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Iterable

from . import _kron

INF = math.inf


class SeriesError(ValueError):
    """Malformed or non-invertible input."""


class WindowError(SeriesError):
    """A coefficient outside its guaranteed q-window was requested."""

    def __init__(self, message: str, degree: int | None = None, exponent: int | None = None):
        super().__init__(message)
        self.degree = degree
        self.exponent = exponent


# ---------------------------------------------------------------------------
# Gaussian rationals


class GaussianRational:
    """Exact complex rational ``re + i*im``."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            raise TypeError("floating point complex numbers are not exact")
        return cls(x, 0)

    @classmethod
    def i_power(cls, n: int) -> "GaussianRational":
        """i**n for any integer n (i**-1 == -i)."""
        return (cls(1), cls(0, 1), cls(-1), cls(0, -1))[n % 4]

    def __add__(self, o):
        o = GaussianRational.coerce(o)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = GaussianRational.coerce(o)
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return GaussianRational.coerce(o) - self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, o):
        o = GaussianRational.coerce(o)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def inverse(self):
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, o):
        return self * GaussianRational.coerce(o).inverse()

    def __rtruediv__(self, o):
        return GaussianRational.coerce(o) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        base = self if n >= 0 else self.inverse()
        out = GaussianRational(1)
        for _ in range(abs(n)):
            out = out * base
        return out

    def __eq__(self, o):
        try:
            o = GaussianRational.coerce(o)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im)) if self.im else hash(self.re)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def is_real(self) -> bool:
        return self.im == 0

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}*i"
        return f"{self.re}+{self.im}*i" if self.im > 0 else f"{self.re}-{-self.im}*i"


def rational_str(x: Fraction) -> str:
    """Render a rational as a decimal-free ``p/q`` string (``p`` for integers)."""
    return str(Fraction(x))


def parse_rational(s: str) -> Fraction:
    return Fraction(s)


def _split(c: GaussianRational):
    """Return (a, b, den) integers with c == (a + i b)/den."""
    den = c.re.denominator * c.im.denominator // math.gcd(c.re.denominator, c.im.denominator)
    return c.re.numerator * (den // c.re.denominator), c.im.numerator * (den // c.im.denominator), den


# ---------------------------------------------------------------------------
# QLaurent


class QLaurent:
    """Truncated Laurent series in q with a validity window.

    Stored exponents run from ``min_order`` upward; every coefficient with
    exponent at most ``max_valid`` is exact, anything above is unknown.
    ``max_valid`` is ``INF`` for exact (finite) Laurent polynomials.
    A series that vanishes inside its window has ``min_order = max_valid + 1``.
    """

    __slots__ = ("lo", "re", "im", "den", "mv")

    def __init__(self, lo: int, re: list, im: list | None = None, den: int = 1, mv=INF):
        # assumes normalized input; use QLaurent.make otherwise
        self.lo = lo
        self.re = re
        self.im = im
        self.den = den
        self.mv = mv

    # construction ---------------------------------------------------------

    @classmethod
    def make(cls, lo: int, re: list, im: list | None, den: int, mv) -> "QLaurent":
        n = len(re)
        if im is not None and len(im) != n:
            raise SeriesError("real and imaginary parts differ in length")
        if mv != INF and lo + n - 1 > mv:
            n = max(0, mv - lo + 1)
            re = re[:n]
            if im is not None:
                im = im[:n]
        if im is not None and not any(im):
            im = None
        start = 0
        if im is None:
            while start < n and not re[start]:
                start += 1
        else:
            while start < n and not re[start] and not im[start]:
                start += 1
        if start == n:
            return cls.zero(mv)
        end = n
        if im is None:
            while not re[end - 1]:
                end -= 1
        else:
            while not re[end - 1] and not im[end - 1]:
                end -= 1
        if start or end < n:
            re = re[start:end]
            if im is not None:
                im = im[start:end]
        if den < 0:
            den = -den
            re = [-c for c in re]
            if im is not None:
                im = [-c for c in im]
        if den != 1:
            g = math.gcd(den, *re) if im is None else math.gcd(den, *re, *im)
            if g > 1:
                den //= g
                re = [c // g for c in re]
                if im is not None:
                    im = [c // g for c in im]
        return cls(lo + start, re, im, den, mv)

    @classmethod
    def zero(cls, mv=INF) -> "QLaurent":
        return cls(0 if mv == INF else mv + 1, [], None, 1, mv)

    @classmethod
    def monomial(cls, k: int, c=1, mv=INF) -> "QLaurent":
        return cls.from_coeffs({k: c}, mv)

    @classmethod
    def from_coeffs(cls, coeffs, mv=INF, lo: int | None = None) -> "QLaurent":
        """Build from a dict exponent -> number, or a list starting at ``lo``."""
        if not isinstance(coeffs, dict):
            coeffs = {lo + i: c for i, c in enumerate(coeffs)}
        items = {k: GaussianRational.coerce(c) for k, c in coeffs.items() if k <= mv}
        items = {k: c for k, c in items.items() if c}
        if not items:
            return cls.zero(mv)
        k0, k1 = min(items), max(items)
        den = 1
        for c in items.values():
            den = math.lcm(den, c.re.denominator, c.im.denominator)
        re = [0] * (k1 - k0 + 1)
        im = [0] * (k1 - k0 + 1)
        for k, c in items.items():
            re[k - k0] = c.re.numerator * (den // c.re.denominator)
            im[k - k0] = c.im.numerator * (den // c.im.denominator)
        return cls.make(k0, re, im, den, mv)

    # access ---------------------------------------------------------------

    @property
    def min_order(self) -> int:
        return self.lo

    @property
    def max_valid(self):
        return self.mv

    @property
    def hi(self) -> int:
        return self.lo + len(self.re) - 1

    def is_exact_zero(self) -> bool:
        return not self.re and self.mv == INF

    def is_zero(self) -> bool:
        """True if every coefficient inside the window vanishes."""
        return not self.re

    def is_real(self) -> bool:
        return self.im is None

    def __getitem__(self, k: int) -> GaussianRational:
        if k > self.mv:
            raise WindowError(f"q^{k} lies above the valid window (max_valid={self.mv})", exponent=k)
        i = k - self.lo
        if i < 0 or i >= len(self.re):
            return GaussianRational(0)
        im = self.im[i] if self.im is not None else 0
        return GaussianRational(Fraction(self.re[i], self.den), Fraction(im, self.den))

    coefficient = __getitem__

    def items(self):
        """(exponent, coefficient) pairs of the stored nonzero terms."""
        for i in range(len(self.re)):
            k = self.lo + i
            c = self[k]
            if c:
                yield k, c

    def to_dict(self) -> dict:
        return dict(self.items())

    # arithmetic -----------------------------------------------------------

    def _scaled(self, den: int):
        f = den // self.den
        re = [c * f for c in self.re] if f != 1 else self.re
        im = None
        if self.im is not None:
            im = [c * f for c in self.im] if f != 1 else self.im
        return re, im

    def _addsub(self, o: "QLaurent", sign: int) -> "QLaurent":
        mv = min(self.mv, o.mv)
        if not o.re:
            return self.truncate(mv)
        if not self.re:
            r = o.truncate(mv)
            return r if sign > 0 else -r
        den = math.lcm(self.den, o.den)
        ar, ai = self._scaled(den)
        br, bi = o._scaled(den)
        lo = min(self.lo, o.lo)
        hi = max(self.hi, o.hi)
        if mv != INF:
            hi = min(hi, mv)
        if hi < lo:
            return QLaurent.zero(mv)
        n = hi - lo + 1
        re = [0] * n
        for src, start, s in ((ar, self.lo, 1), (br, o.lo, sign)):
            for i, c in enumerate(src):
                j = start - lo + i
                if j >= n:
                    break
                if s > 0:
                    re[j] += c
                else:
                    re[j] -= c
        im = None
        if ai is not None or bi is not None:
            im = [0] * n
            for src, start, s in ((ai, self.lo, 1), (bi, o.lo, sign)):
                if src is None:
                    continue
                for i, c in enumerate(src):
                    j = start - lo + i
                    if j >= n:
                        break
                    im[j] += c if s > 0 else -c
        return QLaurent.make(lo, re, im, den, mv)

    def __add__(self, o):
        return self._addsub(_as_q(o), 1)

    __radd__ = __add__

    def __sub__(self, o):
        return self._addsub(_as_q(o), -1)

    def __rsub__(self, o):
        return _as_q(o)._addsub(self, -1)

    def __neg__(self):
        im = [-c for c in self.im] if self.im is not None else None
        return QLaurent(self.lo, [-c for c in self.re], im, self.den, self.mv)

    def scale(self, c) -> "QLaurent":
        c = GaussianRational.coerce(c)
        if not c:
            return QLaurent.zero()
        if not self.re:
            return self
        a, b, cden = _split(c)
        re, im = self.re, self.im
        if im is None:
            nre = [a * x for x in re] if a else [0] * len(re)
            nim = [b * x for x in re] if b else None
        else:
            nre = [a * x - b * y for x, y in zip(re, im)]
            nim = [b * x + a * y for x, y in zip(re, im)]
        return QLaurent.make(self.lo, nre, nim, self.den * cden, self.mv)

    def shift(self, k: int) -> "QLaurent":
        """Multiply by q**k."""
        return QLaurent(self.lo + k, self.re, self.im, self.den, self.mv + k)

    def truncate(self, mv) -> "QLaurent":
        if mv >= self.mv:
            return self
        if self.hi <= mv:
            return QLaurent(self.lo if self.re else mv + 1, self.re, self.im, self.den, mv)
        n = max(0, mv - self.lo + 1)
        return QLaurent.make(self.lo, self.re[:n], self.im[:n] if self.im is not None else None,
                             self.den, mv)

    def __mul__(self, o):
        if not isinstance(o, QLaurent):
            if isinstance(o, BiSeries):
                return NotImplemented
            return self.scale(o)
        a = BiSeries.from_rows([self], D=0)
        b = BiSeries.from_rows([o], D=0)
        return (a * b).row(0)

    def __rmul__(self, o):
        return self.scale(o)

    def __pow__(self, n: int):
        return BiSeries.from_rows([self], D=0).__pow__(n).row(0)

    def derive(self) -> "QLaurent":
        """q d/dq."""
        re = [(self.lo + i) * c for i, c in enumerate(self.re)]
        im = [(self.lo + i) * c for i, c in enumerate(self.im)] if self.im is not None else None
        return QLaurent.make(self.lo, re, im, self.den, self.mv)

    def chop(self, top: int) -> "QLaurent":
        """The exact Laurent polynomial of the terms up to q**top."""
        n = max(0, min(len(self.re), top - self.lo + 1))
        return QLaurent.make(self.lo, self.re[:n], self.im[:n] if self.im is not None else None,
                             self.den, INF)

    def inverse(self) -> "QLaurent":
        """Multiplicative inverse of a Laurent series with a known leading term."""
        if not self.re:
            raise WindowError("leading coefficient is not determined inside the q-window")
        lo = self.lo
        c0 = self[lo]
        unit = self.shift(-lo).scale(c0.inverse())
        target = unit.mv
        if target == INF:
            if len(unit.re) == 1:
                return QLaurent.monomial(-lo, c0.inverse())
            raise SeriesError("an exact Laurent polynomial has no finite inverse; give it a window")
        one = QLaurent.monomial(0)
        x = one
        prec = 1
        while prec <= target:
            prec = min(2 * prec, target + 1)
            err = (unit.chop(prec - 1) * x).chop(prec - 1) - one
            x = (x - x * err).chop(prec - 1)
        return x.truncate(target).scale(c0.inverse()).shift(-lo)

    def __truediv__(self, o):
        if isinstance(o, QLaurent):
            return self * o.inverse()
        return self.scale(GaussianRational.coerce(o).inverse())

    def equals(self, o: "QLaurent") -> bool:
        """Equality of all coefficients inside the common window."""
        return (self - o).is_zero()

    def __repr__(self):
        terms = ", ".join(f"{k}: {c}" for k, c in list(self.items())[:8])
        more = "..." if len(self.re) > 8 else ""
        return f"QLaurent({{{terms}{more}}}, max_valid={self.mv})"


def _as_q(x) -> QLaurent:
    if isinstance(x, QLaurent):
        return x
    return QLaurent.monomial(0, x)


# ---------------------------------------------------------------------------
# BiSeries


def _valuation(rows, low):
    for i, r in enumerate(rows):
        if not r.is_exact_zero():
            return low + i
    return None


class BiSeries:
    """Power series in Lambda with QLaurent coefficients.

    Rows cover the Lambda degrees ``low..D`` (``low`` may be negative after a
    shift-then-invert).  Degrees above ``D`` are unknown.
    """

    __slots__ = ("low", "D", "rows")

    def __init__(self, low: int, D: int, rows: list):
        if D - low + 1 != len(rows):
            if D < low and not rows:
                pass
            else:
                raise SeriesError("row count does not match the Lambda range")
        self.low = low
        self.D = D
        self.rows = rows

    # construction ---------------------------------------------------------

    @classmethod
    def from_rows(cls, rows: Iterable[QLaurent], D: int | None = None, low: int = 0) -> "BiSeries":
        rows = list(rows)
        if D is None:
            D = low + len(rows) - 1
        if len(rows) < D - low + 1:
            rows += [QLaurent.zero()] * (D - low + 1 - len(rows))
        return cls(low, D, rows[: D - low + 1])

    @classmethod
    def zero(cls, D: int) -> "BiSeries":
        return cls(0, D, [QLaurent.zero()] * (D + 1))

    @classmethod
    def one(cls, D: int) -> "BiSeries":
        return cls.constant(1, D)

    @classmethod
    def constant(cls, c, D: int) -> "BiSeries":
        return cls.from_rows([QLaurent.monomial(0, c)], D)

    @classmethod
    def lam(cls, D: int, power: int = 1) -> "BiSeries":
        """Lambda**power as an exact series."""
        if power < 0:
            return cls(power, D, [QLaurent.monomial(0)] + [QLaurent.zero()] * (D - power))
        return cls.from_rows([QLaurent.zero()] * power + [QLaurent.monomial(0)], D)

    @classmethod
    def from_terms(cls, terms: dict, D: int, mv=INF) -> "BiSeries":
        """terms: (d, k) -> coefficient, the monomial Lambda^d q^k."""
        low = min([d for d, _ in terms] + [0])
        per = {}
        for (d, k), c in terms.items():
            per.setdefault(d, {})[k] = c
        rows = [QLaurent.from_coeffs(per.get(d, {}), mv) if d in per else QLaurent.zero()
                for d in range(low, D + 1)]
        return cls(low, D, rows)

    # access ---------------------------------------------------------------

    @property
    def lambda_truncation(self) -> int:
        return self.D

    def row(self, d: int) -> QLaurent:
        if d > self.D:
            raise WindowError(f"Lambda^{d} lies above the truncation D={self.D}", degree=d)
        if d < self.low:
            return QLaurent.zero()
        return self.rows[d - self.low]

    def __getitem__(self, key):
        d, k = key
        try:
            return self.row(d)[k]
        except WindowError as exc:
            raise WindowError(str(exc), degree=d, exponent=k) from None

    def valuation(self):
        return _valuation(self.rows, self.low)

    def windows(self) -> dict:
        return {self.low + i: r.mv for i, r in enumerate(self.rows)}

    def min_orders(self) -> dict:
        return {self.low + i: r.lo for i, r in enumerate(self.rows) if r.re}

    def is_zero(self) -> bool:
        return all(r.is_zero() for r in self.rows)

    def is_real(self) -> bool:
        return all(r.is_real() for r in self.rows)

    def terms(self):
        """Yield ((d, k), coefficient) for stored nonzero coefficients."""
        for i, r in enumerate(self.rows):
            for k, c in r.items():
                yield (self.low + i, k), c

    # structural -----------------------------------------------------------

    def truncate(self, D: int) -> "BiSeries":
        if D >= self.D:
            return self
        if D < self.low:
            return BiSeries(D + 1, D, [])
        return BiSeries(self.low, D, self.rows[: D - self.low + 1])

    def cap_windows(self, mv_of) -> "BiSeries":
        """Lower each row window to ``mv_of(d)`` where that is smaller."""
        return BiSeries(self.low, self.D,
                        [r.truncate(mv_of(self.low + i)) for i, r in enumerate(self.rows)])

    def shift_lambda(self, k: int) -> "BiSeries":
        return BiSeries(self.low + k, self.D + k, self.rows)

    def shift_q(self, k: int) -> "BiSeries":
        return BiSeries(self.low, self.D, [r.shift(k) for r in self.rows])

    def normalized_low(self) -> "BiSeries":
        """Drop exactly-zero rows below the valuation (keeping low <= 0)."""
        v = self.valuation()
        if v is None or v <= self.low:
            return self
        new_low = min(v, max(self.low, 0))
        return BiSeries(new_low, self.D, self.rows[new_low - self.low:])

    def map_rows(self, fn) -> "BiSeries":
        return BiSeries(self.low, self.D, [fn(self.low + i, r) for i, r in enumerate(self.rows)])

    # linear ---------------------------------------------------------------

    def _linear(self, o: "BiSeries", sign: int) -> "BiSeries":
        D = min(self.D, o.D)
        low = min(self.low, o.low)
        rows = []
        for d in range(low, D + 1):
            a, b = self.row(d), o.row(d)
            rows.append(a._addsub(b, sign))
        return BiSeries(low, D, rows)

    def __add__(self, o):
        return self._linear(_as_bi(o, self.D), 1)

    __radd__ = __add__

    def __sub__(self, o):
        return self._linear(_as_bi(o, self.D), -1)

    def __rsub__(self, o):
        return _as_bi(o, self.D)._linear(self, -1)

    def __neg__(self):
        return BiSeries(self.low, self.D, [-r for r in self.rows])

    def scale(self, c) -> "BiSeries":
        c = GaussianRational.coerce(c)
        return BiSeries(self.low, self.D, [r.scale(c) for r in self.rows])

    @staticmethod
    def lincomb(terms: list) -> "BiSeries":
        """sum of c * s over (c, s) pairs, with the minimum truncation."""
        terms = [(GaussianRational.coerce(c), s) for c, s in terms]
        terms = [(c, s) for c, s in terms if c]
        if not terms:
            raise SeriesError("empty linear combination")
        D = min(s.D for _, s in terms)
        low = min(s.low for _, s in terms)
        rows = []
        for d in range(low, D + 1):
            parts = [(c, s.row(d)) for c, s in terms]
            mv = min(r.mv for _, r in parts)
            live = [(c, r) for c, r in parts if r.re]
            if not live:
                rows.append(QLaurent.zero(mv))
                continue
            lo = min(r.lo for _, r in live)
            hi = max(r.hi for _, r in live)
            if mv != INF:
                hi = min(hi, mv)
            if hi < lo:
                rows.append(QLaurent.zero(mv))
                continue
            den = 1
            split = []
            for c, r in live:
                a, b, cd = _split(c)
                split.append((a, b, cd * r.den, r))
                den = math.lcm(den, cd * r.den)
            n = hi - lo + 1
            re = [0] * n
            im = [0] * n
            for a, b, dd, r in split:
                f = den // dd
                fa, fb = a * f, b * f
                off = r.lo - lo
                rre, rim = r.re, r.im
                m = min(len(rre), n - off)
                if rim is None:
                    for i in range(m):
                        x = rre[i]
                        if fa:
                            re[off + i] += fa * x
                        if fb:
                            im[off + i] += fb * x
                else:
                    for i in range(m):
                        x, y = rre[i], rim[i]
                        re[off + i] += fa * x - fb * y
                        im[off + i] += fb * x + fa * y
            rows.append(QLaurent.make(lo, re, im, den, mv))
        return BiSeries(low, D, rows)

    # multiplication -------------------------------------------------------

    def __mul__(self, o):
        if isinstance(o, QLaurent):
            o = BiSeries.from_rows([o], D=self.D - (self.valuation() or 0))
        elif not isinstance(o, BiSeries):
            return self.scale(o)
        return _multiply(self, o)

    def __rmul__(self, o):
        if isinstance(o, QLaurent):
            return self.__mul__(o)
        return self.scale(o)

    def __pow__(self, n: int) -> "BiSeries":
        if n < 0:
            return self.invert() ** (-n)
        result = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        return result if result is not None else BiSeries.one(self.D)

    # inversion ------------------------------------------------------------

    def invert(self) -> "BiSeries":
        """Multiplicative inverse.

        The lowest nonzero row must be a q-Laurent unit.  A positive
        Lambda-valuation v is shifted out first, so the result starts at
        Lambda^-v.
        """
        v = self.valuation()
        if v is None:
            raise SeriesError("cannot invert the zero series")
        a = self.shift_lambda(-v).normalized_low()
        head = a.row(0)
        try:
            x0 = head.inverse()
        except WindowError as exc:
            raise WindowError(f"leading Lambda-coefficient undetermined: {exc}", degree=v) from None
        x = BiSeries.from_rows([x0], D=0)
        prec = 1
        while prec <= a.D:
            prec = min(2 * prec, a.D + 1)
            at = a.truncate(prec - 1)
            xt = BiSeries.from_rows(x.rows, D=prec - 1)
            e = (at * xt).truncate(prec - 1)
            # rows below the old precision are exactly 1, 0, 0, ...
            k = len(x.rows)
            e = BiSeries(0, e.D, [QLaurent.zero()] * k + e.rows[k:])
            corr = (xt * e).truncate(prec - 1)
            x = (xt - corr)
            x = BiSeries(0, prec - 1, x.rows[: prec])
        return x.shift_lambda(-v)

    def __truediv__(self, o):
        if isinstance(o, BiSeries):
            return self * o.invert()
        if isinstance(o, QLaurent):
            return self * o.inverse()
        return self.scale(GaussianRational.coerce(o).inverse())

    # analytic -------------------------------------------------------------

    def _power_sum(self, coeffs) -> "BiSeries":
        v = self.valuation()
        if v is not None and v < 1:
            raise SeriesError("series must have zero Lambda^0 (and negative) coefficients")
        if any(not r.is_exact_zero() for r in self.rows[: max(0, 1 - self.low)]):
            raise SeriesError("series must have zero Lambda^0 coefficient")
        D = self.D
        out = [(coeffs(0), BiSeries.one(D))]
        if v is not None:
            p = None
            for k in range(1, D // v + 1):
                p = self if p is None else (p * self).truncate(D)
                out.append((coeffs(k), p))
        return BiSeries.lincomb([(c, s) for c, s in out if c] or [(1, BiSeries.zero(D))])

    def exp(self) -> "BiSeries":
        """exp of a series with zero Lambda^0 row."""
        return self._power_sum(lambda k: Fraction(1, math.factorial(k)))

    def sqrt_one_plus(self) -> "BiSeries":
        """Principal square root of 1 + self."""
        return self._power_sum(lambda k: _binom(Fraction(1, 2), k))

    def derive(self, which: str) -> "BiSeries":
        if which == "q_log":
            return BiSeries(self.low, self.D, [r.derive() for r in self.rows])
        if which == "lambda_log":
            return BiSeries(self.low, self.D,
                            [r.scale(self.low + i) if self.low + i else QLaurent.zero()
                             for i, r in enumerate(self.rows)])
        raise SeriesError(f"unknown derivative {which!r}")

    # extraction -----------------------------------------------------------

    def coeff_q0(self, D: int | None = None) -> dict:
        """q^0 coefficient of every Lambda row up to ``D`` (default: all)."""
        top = self.D if D is None else D
        if top > self.D:
            raise WindowError(f"Lambda^{top} requested but truncation is {self.D}", degree=top)
        out = {}
        for d in range(self.low, top + 1):
            r = self.row(d)
            if r.mv < 0:
                raise WindowError(f"q^0 of Lambda^{d} is outside the window (max_valid={r.mv})",
                                  degree=d, exponent=0)
            out[d] = r[0]
        return out

    def support_ok(self, q_shift: int = 0, lam_shift: int = 0, neg: bool = False) -> bool:
        """Membership in q^q_shift Lambda^lam_shift R, R = Q[[q^2 L^2, q^4]].

        With ``neg`` the ring Q[[q^-2 L^2, q^4]] is used instead.
        """
        for (d, k), _ in self.terms():
            dd, kk = d - lam_shift, k - q_shift
            if dd < 0 or (dd % 2):
                return False
            if neg:
                kk += dd
                if kk < 0 or kk % 4:
                    return False
            else:
                kk -= dd
                if kk < 0 or kk % 4:
                    return False
        return True

    def equals(self, o: "BiSeries") -> bool:
        return (self - o).is_zero()

    # serialization --------------------------------------------------------

    def to_json_obj(self) -> dict:
        rows = []
        for i, r in enumerate(self.rows):
            rows.append({
                "d": self.low + i,
                "min_order": r.lo,
                "max_valid": None if r.mv == INF else r.mv,
                "coeffs": [{"k": k, "re": rational_str(c.re), "im": rational_str(c.im)}
                           for k, c in r.items()],
            })
        return {"lambda_truncation": self.D, "rows": rows}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_json_obj(), **kw)

    @classmethod
    def from_json_obj(cls, obj: dict) -> "BiSeries":
        D = obj["lambda_truncation"]
        rows = {}
        for r in obj["rows"]:
            mv = INF if r["max_valid"] is None else r["max_valid"]
            coeffs = {c["k"]: GaussianRational(Fraction(c["re"]), Fraction(c["im"]))
                      for c in r["coeffs"]}
            rows[r["d"]] = QLaurent.from_coeffs(coeffs, mv)
        low = min(rows) if rows else 0
        return cls(low, D, [rows.get(d, QLaurent.zero()) for d in range(low, D + 1)])

    @classmethod
    def from_json(cls, s: str) -> "BiSeries":
        return cls.from_json_obj(json.loads(s))

    def __repr__(self):
        return f"BiSeries(low={self.low}, D={self.D}, windows={self.windows()})"


def _binom(a: Fraction, k: int) -> Fraction:
    out = Fraction(1)
    for j in range(k):
        out = out * (a - j) / (j + 1)
    return out


def _as_bi(x, D) -> BiSeries:
    if isinstance(x, BiSeries):
        return x
    if isinstance(x, QLaurent):
        return BiSeries.from_rows([x], D)
    return BiSeries.constant(x, D)


def _multiply(a: BiSeries, b: BiSeries) -> BiSeries:
    va, vb = a.valuation(), b.valuation()
    ea = va if va is not None else a.D + 1
    eb = vb if vb is not None else b.D + 1
    D = min(a.D + eb, b.D + ea)
    low = a.low + b.low
    if va is None or vb is None or D < va + vb:
        return BiSeries(low, max(D, low - 1), [QLaurent.zero()] * max(0, D - low + 1))
    arows = {d: a.row(d) for d in range(va, D - vb + 1)}
    brows = {d: b.row(d) for d in range(vb, D - va + 1)}
    arows = {d: r for d, r in arows.items() if not r.is_exact_zero()}
    brows = {d: r for d, r in brows.items() if not r.is_exact_zero()}

    # windows and stored ranges of the product rows
    mv = {}
    span = {}
    for e in range(va + vb, D + 1):
        m = INF
        lo = hi = None
        for d, ra in arows.items():
            rb = brows.get(e - d)
            if rb is None:
                continue
            m = min(m, ra.mv + rb.lo, rb.mv + ra.lo)
            if ra.re and rb.re:
                l, h = ra.lo + rb.lo, ra.hi + rb.hi
                lo = l if lo is None else min(lo, l)
                hi = h if hi is None else max(hi, h)
        mv[e] = m
        if lo is not None:
            if m != INF:
                hi = min(hi, m)
            if hi >= lo:
                span[e] = (lo, hi)

    # trim stored ranges that cannot reach any valid output coefficient
    def trimmed(rows, other):
        out_re, out_im, dens = {}, {}, {}
        for d, r in rows.items():
            if not r.re:
                continue
            top = -INF
            for d2, r2 in other.items():
                e = d + d2
                if e in span and r2.re:
                    top = max(top, span[e][1] - r2.lo)
            if top == -INF:
                continue
            n = len(r.re) if top == INF else min(len(r.re), int(top) - r.lo + 1)
            if n <= 0:
                continue
            dens[d] = r.den
            out_re[d] = (r.lo, r.re[:n])
            if r.im is not None:
                out_im[d] = (r.lo, r.im[:n])
        return out_re, out_im, dens

    are, aim, aden = trimmed(arows, brows)
    bre, bim, bden = trimmed(brows, arows)
    La = 1
    for x in aden.values():
        La = math.lcm(La, x)
    Lb = 1
    for x in bden.values():
        Lb = math.lcm(Lb, x)

    def rescale(parts, dens, L):
        out = {}
        for d, (lo, cs) in parts.items():
            f = L // dens[d]
            out[d] = (lo, cs if f == 1 else [c * f for c in cs])
        return out

    are, aim = rescale(are, aden, La), rescale(aim, aden, La)
    bre, bim = rescale(bre, bden, Lb), rescale(bim, bden, Lb)
    wanted = dict(span)
    if wanted and (are or aim) and (bre or bim):
        re_rows, im_rows = _kron.complex_product(are, aim, bre, bim, wanted)
    else:
        re_rows, im_rows = {}, {}
    den = La * Lb
    rows = []
    for e in range(low, D + 1):
        if e not in mv:
            rows.append(QLaurent.zero())
        elif e in re_rows:
            lo = span[e][0]
            rows.append(QLaurent.make(lo, re_rows[e], im_rows[e], den, mv[e]))
        else:
            rows.append(QLaurent.zero(mv[e]))
    return BiSeries(low, D, rows)
