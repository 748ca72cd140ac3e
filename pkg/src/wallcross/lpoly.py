"""Truncated power series in Lambda with exact rational coefficients."""

from __future__ import annotations

from fractions import Fraction

from .series import SeriesError, parse_rational, rational_str


class LambdaPoly:
    """Coefficients of Lambda^d for d <= D; everything above D is unknown.

    ``D`` may be ``None`` for an exact polynomial.
    """

    __slots__ = ("coeffs", "D")

    def __init__(self, coeffs=None, D: int | None = None):
        c = {}
        for d, v in (coeffs or {}).items():
            v = Fraction(v)
            if v and (D is None or d <= D):
                c[int(d)] = v
        self.coeffs = c
        self.D = D

    @classmethod
    def monomial(cls, d: int, c=1, D: int | None = None) -> "LambdaPoly":
        return cls({d: c}, D)

    @classmethod
    def one(cls, D: int | None = None) -> "LambdaPoly":
        return cls({0: 1}, D)

    def __getitem__(self, d: int) -> Fraction:
        if self.D is not None and d > self.D:
            raise SeriesError(f"Lambda^{d} lies above the truncation {self.D}")
        return self.coeffs.get(d, Fraction(0))

    def degrees(self):
        return sorted(self.coeffs)

    def items(self):
        return [(d, self.coeffs[d]) for d in sorted(self.coeffs)]

    def valuation(self):
        return min(self.coeffs) if self.coeffs else None

    def _D(self, o) -> int | None:
        if self.D is None:
            return o.D
        if o.D is None:
            return self.D
        return min(self.D, o.D)

    def truncate(self, D: int) -> "LambdaPoly":
        D = D if self.D is None else min(D, self.D)
        return LambdaPoly(self.coeffs, D)

    def __add__(self, o):
        o = _lift(o)
        c = dict(self.coeffs)
        for d, v in o.coeffs.items():
            c[d] = c.get(d, 0) + v
        return LambdaPoly(c, self._D(o))

    __radd__ = __add__

    def __neg__(self):
        return LambdaPoly({d: -v for d, v in self.coeffs.items()}, self.D)

    def __sub__(self, o):
        return self + (-_lift(o))

    def __rsub__(self, o):
        return _lift(o) - self

    def scale(self, c) -> "LambdaPoly":
        c = Fraction(c)
        return LambdaPoly({d: c * v for d, v in self.coeffs.items()}, self.D)

    def shift(self, k: int) -> "LambdaPoly":
        """Multiply by Lambda^k (k may be negative)."""
        return LambdaPoly({d + k: v for d, v in self.coeffs.items()},
                          None if self.D is None else self.D + k)

    def __mul__(self, o):
        if not isinstance(o, LambdaPoly):
            return self.scale(o)
        va, vb = self.valuation(), o.valuation()
        if va is None or vb is None:
            D = self._D(o)
            return LambdaPoly({}, D)
        # known range of the product: limited by each factor's truncation
        cands = []
        if self.D is not None:
            cands.append(self.D + vb)
        if o.D is not None:
            cands.append(o.D + va)
        D = min(cands) if cands else None
        c = {}
        for d1, v1 in self.coeffs.items():
            for d2, v2 in o.coeffs.items():
                e = d1 + d2
                if D is None or e <= D:
                    c[e] = c.get(e, 0) + v1 * v2
        return LambdaPoly(c, D)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = LambdaPoly.one(self.D)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def inverse(self, D: int | None = None) -> "LambdaPoly":
        """Power-series inverse; needs a nonzero constant term."""
        a0 = self.coeffs.get(0)
        if not a0:
            raise SeriesError("series inverse needs a nonzero constant term")
        if D is None:
            D = self.D
        if D is None:
            raise SeriesError("inverse of an exact polynomial needs a truncation")
        if self.D is not None:
            D = min(D, self.D)
        out = {0: 1 / a0}
        for d in range(1, D + 1):
            s = Fraction(0)
            for k, v in self.coeffs.items():
                if 0 < k <= d and (d - k) in out:
                    s += v * out[d - k]
            if s:
                out[d] = -s / a0
        return LambdaPoly(out, D)

    def __truediv__(self, o):
        if not isinstance(o, LambdaPoly):
            return self.scale(1 / Fraction(o))
        D = self._D(o)
        if D is None:
            raise SeriesError("division of exact polynomials needs a truncation")
        return self * o.inverse(D)

    def divide_by_lambda(self, k: int = 1) -> "LambdaPoly":
        """Exact division by Lambda^k; a nonzero low coefficient is a remainder."""
        bad = [d for d in self.coeffs if d < k]
        if bad:
            raise SeriesError(f"division by Lambda^{k} leaves a remainder at Lambda^{min(bad)}")
        return self.shift(-k)

    def equals(self, o, D: int | None = None) -> bool:
        return self.first_mismatch(o, D) is None

    def first_mismatch(self, o, D: int | None = None):
        """(d, expected, got) for the first differing degree, or None."""
        o = _lift(o)
        top = self._D(o)
        if D is not None:
            top = D if top is None else min(top, D)
        degs = sorted(set(self.coeffs) | set(o.coeffs))
        for d in degs:
            if top is not None and d > top:
                break
            if self[d] != o[d]:
                return d, o[d], self[d]
        return None

    def __eq__(self, o):
        if not isinstance(o, LambdaPoly):
            return NotImplemented
        return self.coeffs == o.coeffs and self.D == o.D

    def __hash__(self):
        return hash((tuple(sorted(self.coeffs.items())), self.D))

    def to_json_obj(self) -> list:
        return [{"d": d, "c": rational_str(v)} for d, v in self.items()]

    @classmethod
    def from_json_obj(cls, items: list, D: int | None = None) -> "LambdaPoly":
        return cls({int(t["d"]): parse_rational(t["c"]) for t in items}, D)

    def __str__(self):
        if not self.coeffs:
            body = "0"
        else:
            parts = []
            for d, v in self.items():
                mono = "" if d == 0 else ("L" if d == 1 else f"L^{d}")
                coef = str(v)
                parts.append(f"{coef}*{mono}" if mono else coef)
            body = " + ".join(parts).replace("+ -", "- ")
        return body + ("" if self.D is None else f" + O(L^{self.D + 1})")

    def __repr__(self):
        return f"LambdaPoly({self})"


def _lift(x) -> LambdaPoly:
    if isinstance(x, LambdaPoly):
        return x
    return LambdaPoly({0: Fraction(x)}, None)
