"""Lattice data of rational surfaces and enumeration of wall classes.

A class is stored by its coordinates in the integral basis of the surface.
On the one-point blowup of the plane the basis is (H, E) and the ruling
classes ``F = H - E`` and ``G = (H + E)/2`` are available as aliases; ``G`` is
a half-class.
"""

from __future__ import annotations

import ast
import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction


class GeometryError(ValueError):
    """Invalid class, surface or enumeration request."""


@dataclass(frozen=True)
class Surface:
    name: str
    labels: tuple
    gram: tuple
    canonical: tuple
    signature: int
    aliases: dict = field(default_factory=dict, compare=False, hash=False)
    fibres: tuple = field(default=(), compare=False, hash=False)
    half_classes: bool = field(default=False, compare=False, hash=False)

    @property
    def rank(self) -> int:
        return len(self.labels)

    @property
    def euler(self) -> int:
        return 2 + self.rank

    @property
    def K(self) -> "DivisorClass":
        return DivisorClass(self, self.canonical)

    def cls(self, *coords) -> "DivisorClass":
        return DivisorClass(self, tuple(Fraction(c) for c in coords))

    def zero(self) -> "DivisorClass":
        return self.cls(*([0] * self.rank))

    def basis(self, label: str) -> "DivisorClass":
        if label in self.labels:
            v = [0] * self.rank
            v[self.labels.index(label)] = 1
            return self.cls(*v)
        if label in self.aliases:
            return self.cls(*self.aliases[label])
        raise GeometryError(f"unknown class label {label!r} on {self.name}")

    def form(self, a, b) -> Fraction:
        g = self.gram
        return sum(a[i] * g[i][j] * b[j] for i in range(self.rank) for j in range(self.rank)
                   if g[i][j] and a[i] and b[j])

    def check(self) -> list:
        """List of violated structural invariants (empty when consistent)."""
        bad = []
        if self.euler + self.signature != 4:
            bad.append("e + sigma != 4")
        for i in range(self.rank):
            x = [0] * self.rank
            x[i] = 1
            if (self.form(x, x) - self.form(x, self.canonical)) % 2:
                bad.append(f"K not characteristic on {self.labels[i]}")
        pos = sum(1 for v in _eigen_signs(self.gram) if v > 0)
        if pos != 1:
            bad.append("intersection form is not hyperbolic")
        return bad

    def blowup(self) -> "Surface":
        """The blowup in one general point."""
        if self.name == "P2":
            return P2HAT
        new = "E" if "E" not in self.labels else f"E{sum(1 for l in self.labels if l.startswith('E')) + 1}"
        r = self.rank
        gram = tuple(tuple(self.gram[i]) + (0,) for i in range(r)) + (tuple([0] * r) + (-1,),)
        K = tuple(self.canonical) + (Fraction(1),)
        aliases = {k: tuple(v) + (Fraction(0),) for k, v in self.aliases.items()}
        fibres = tuple(tuple(f) + (Fraction(0),) for f in self.fibres)
        if self.name == "P2hat":
            # the pencil of lines through the second point is a second ruling
            fibres = fibres + ((Fraction(1), Fraction(0), Fraction(-1)),)
            name = "Bl2P2"
        elif self.name == "P1xP1":
            name = "Bl1P1xP1"
        else:
            name = f"blowup-of-{self.name}"
        return Surface(name, self.labels + (new,), gram, K, self.signature - 1,
                       aliases, fibres, self.half_classes)

    def __str__(self):
        return self.name


def _eigen_signs(gram):
    """Signs of a diagonalization of a small symmetric rational matrix."""
    m = [[Fraction(x) for x in row] for row in gram]
    n = len(m)
    signs = []
    for k in range(n):
        piv = None
        for i in range(k, n):
            if m[i][i]:
                piv = i
                break
        if piv is None:
            for i in range(k + 1, n):
                if m[k][i]:
                    # replace e_k by e_k + e_i to create a nonzero diagonal
                    for j in range(n):
                        m[k][j] += m[i][j]
                    for j in range(n):
                        m[j][k] += m[j][i]
                    break
            piv = k if m[k][k] else None
        if piv is None:
            signs.append(0)
            continue
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
            for row in m:
                row[k], row[piv] = row[piv], row[k]
        p = m[k][k]
        signs.append(1 if p > 0 else -1)
        for i in range(k + 1, n):
            f = m[i][k] / p
            for j in range(k, n):
                m[i][j] -= f * m[k][j]
        for i in range(k + 1, n):
            m[k][i] = Fraction(0)
            m[i][k] = Fraction(0)
    return signs


_F = Fraction
P2 = Surface("P2", ("H",), ((1,),), (_F(-3),), 1)
P1XP1 = Surface("P1xP1", ("F", "G"), ((0, 1), (1, 0)), (_F(-2), _F(-2)), 0,
                fibres=((_F(1), _F(0)), (_F(0), _F(1))))
P2HAT = Surface("P2hat", ("H", "E"), ((1, 0), (0, -1)), (_F(-3), _F(1)), 0,
                aliases={"F": (_F(1), _F(-1)), "G": (_F(1, 2), _F(1, 2))},
                fibres=((_F(1), _F(-1)),), half_classes=True)

_SURFACES = {
    "P2": P2, "P1xP1": P1XP1, "P2hat": P2HAT,
    "Bl2P2": P2HAT.blowup(), "Bl1P1xP1": P1XP1.blowup(),
    "blowup-of-P2": P2HAT, "blowup-of-P2hat": P2HAT.blowup(), "blowup-of-P1xP1": P1XP1.blowup(),
}


def surface(name: str) -> Surface:
    try:
        return _SURFACES[name]
    except KeyError:
        raise GeometryError(f"unknown surface {name!r}; choose from P2, P1xP1, P2hat, "
                            "Bl2P2, Bl1P1xP1") from None


@dataclass(frozen=True)
class DivisorClass:
    surface: Surface
    coords: tuple

    def _other(self, o) -> "DivisorClass":
        if not isinstance(o, DivisorClass):
            raise TypeError("expected a divisor class")
        if o.surface != self.surface:
            raise GeometryError(f"classes live on different surfaces ({self.surface.name}, "
                                f"{o.surface.name})")
        return o

    def __add__(self, o):
        o = self._other(o)
        return DivisorClass(self.surface, tuple(a + b for a, b in zip(self.coords, o.coords)))

    def __sub__(self, o):
        o = self._other(o)
        return DivisorClass(self.surface, tuple(a - b for a, b in zip(self.coords, o.coords)))

    def __neg__(self):
        return DivisorClass(self.surface, tuple(-a for a in self.coords))

    def __mul__(self, c):
        c = Fraction(c)
        return DivisorClass(self.surface, tuple(c * a for a in self.coords))

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1 / Fraction(c))

    def pair(self, o) -> Fraction:
        o = self._other(o)
        return self.surface.form(self.coords, o.coords)

    @property
    def square(self) -> Fraction:
        return self.pair(self)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coords)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def congruent_mod2(self, o) -> bool:
        diff = self - o
        return all(c.denominator == 1 and c.numerator % 2 == 0 for c in diff.coords)

    def key(self) -> tuple:
        return (self.surface.name,) + tuple(self.coords)

    def __str__(self):
        return format_class(self)

    def __repr__(self):
        return f"DivisorClass({self.surface.name}: {format_class(self)})"


def pair(a: DivisorClass, b: DivisorClass) -> Fraction:
    return a.pair(b)


def format_class(c: DivisorClass) -> str:
    parts = []
    for label, x in zip(c.surface.labels, c.coords):
        if not x:
            continue
        mag = abs(x)
        coef = "" if mag == 1 else (f"{mag.numerator}" if mag.denominator == 1
                                    else f"{mag.numerator}/{mag.denominator}")
        sign = "-" if x < 0 else "+"
        parts.append((sign, f"{coef}{label}"))
    if not parts:
        return "0"
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, t in parts[1:]:
        out += sign + t
    return out


# ---------------------------------------------------------------------------
# parsing

_IMPLICIT = re.compile(r"(\d|\))\s*([A-Za-z(])")


def parse_class(expr: str, surf: Surface, allow_half: bool | None = None) -> DivisorClass:
    """Parse a linear expression such as ``3H-E``, ``nF+2G`` or ``(H+E)/2``.

    Classes must be integral, except that surfaces carrying the half-class
    ``G`` accept half-integral coordinates.
    """
    text = expr.strip()
    if not text:
        raise GeometryError("empty class expression")
    text = _IMPLICIT.sub(r"\1*\2", text)
    text = _IMPLICIT.sub(r"\1*\2", text)
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError:
        raise GeometryError(f"cannot parse class {expr!r}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return Fraction(node.value)
        if isinstance(node, ast.Name):
            return surf.basis(node.id)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            a, b = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                if isinstance(a, Fraction) and isinstance(b, Fraction):
                    return a + b
                if isinstance(a, Fraction) or isinstance(b, Fraction):
                    if (a if isinstance(a, Fraction) else b) == 0:
                        return b if isinstance(a, Fraction) else a
                    raise GeometryError(f"cannot add a number to a class in {expr!r}")
                return a + b
            if isinstance(node.op, ast.Sub):
                if isinstance(a, Fraction) and isinstance(b, Fraction):
                    return a - b
                if isinstance(a, Fraction) or isinstance(b, Fraction):
                    raise GeometryError(f"cannot subtract a number and a class in {expr!r}")
                return a - b
            if isinstance(node.op, ast.Mult):
                if isinstance(a, Fraction) and isinstance(b, Fraction):
                    return a * b
                if isinstance(a, DivisorClass) and isinstance(b, DivisorClass):
                    raise GeometryError(f"product of two classes in {expr!r}")
                return a * b if isinstance(b, Fraction) else b * a
            if isinstance(node.op, ast.Div):
                if not isinstance(b, Fraction) or b == 0:
                    raise GeometryError(f"can only divide by a nonzero number in {expr!r}")
                return a / b
        raise GeometryError(f"unsupported syntax in class {expr!r}")

    val = ev(tree)
    if isinstance(val, Fraction):
        if val != 0:
            raise GeometryError(f"{expr!r} is a number, not a class")
        val = surf.zero()
    if allow_half is None:
        allow_half = surf.half_classes
    if not val.is_integral():
        if not allow_half or any((2 * c).denominator != 1 for c in val.coords):
            raise GeometryError(f"{expr!r} is not an integral class on {surf.name}")
    return val


def ruling_coords(L: DivisorClass):
    """(n, m) with L = nF + mG on a surface ruled by F with section class G."""
    s = L.surface
    if s.name not in ("P1xP1", "P2hat"):
        raise GeometryError(f"{s.name} has no (F, G) coordinates")
    F, G = s.basis("F"), s.basis("G")
    return L.pair(G), L.pair(F)


# ---------------------------------------------------------------------------
# walls


@dataclass(frozen=True)
class WallClass:
    xi: DivisorClass
    N: int
    d_range: tuple

    @property
    def square(self) -> int:
        return int(self.xi.square)

    def __str__(self):
        return format_class(self.xi)


def make_wall(xi: DivisorClass, L: DivisorClass, d_max: int) -> WallClass:
    s = xi.surface
    N = xi.pair(L - s.K)
    if N.denominator != 1:
        raise GeometryError(f"<xi, L-K> is not an integer for xi={xi}, L={L}")
    N = int(N)
    sq = int(xi.square)
    return WallClass(xi, N, (-sq, min(d_max, sq + 2 * abs(N) + 4)))


def passes_vanishing(xi: DivisorClass, L: DivisorClass) -> bool:
    N = xi.pair(L - xi.surface.K)
    return -xi.square <= abs(N) + 2


def _require_line_bundle(c: DivisorClass, what: str):
    if not c.is_integral():
        raise GeometryError(f"{what} = {c} is not an integral class")


def _solve(mat, rhs):
    """Solve a small square linear system over Q."""
    n = len(mat)
    a = [[Fraction(x) for x in row] + [Fraction(r)] for row, r in zip(mat, rhs)]
    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][k]), None)
        if piv is None:
            raise GeometryError("degenerate polarizations")
        a[k], a[piv] = a[piv], a[k]
        for i in range(n):
            if i != k and a[i][k]:
                f = a[i][k] / a[k][k]
                a[i] = [x - f * y for x, y in zip(a[i], a[k])]
    return [a[i][n] / a[i][i] for i in range(n)]


def _granularity(c1: DivisorClass, H: DivisorClass) -> Fraction:
    """Smallest positive value of |<xi, H>| over xi in c1 + 2*lattice."""
    s = H.surface
    vals = [2 * s.basis(l).pair(H) for l in s.labels]
    den = 1
    for v in vals + [c1.pair(H)]:
        den = math.lcm(den, Fraction(v).denominator)
    ints = [int(v * den) for v in vals]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    base = int(c1.pair(H) * den)
    if g == 0:
        return Fraction(abs(base), den) if base else Fraction(0)
    r = base % g
    return Fraction(min(r, g - r) if r else g, den)


def _orth_basis(surf: Surface, classes):
    """A rational basis of the orthogonal complement of the given classes."""
    r = surf.rank
    rows = [[surf.form(c.coords, _unit(r, j)) for j in range(r)] for c in classes]
    # null space by Gaussian elimination
    m = [list(map(Fraction, row)) for row in rows]
    pivots = []
    rix = 0
    for col in range(r):
        piv = next((i for i in range(rix, len(m)) if m[i][col]), None)
        if piv is None:
            continue
        m[rix], m[piv] = m[piv], m[rix]
        p = m[rix][col]
        m[rix] = [x / p for x in m[rix]]
        for i in range(len(m)):
            if i != rix and m[i][col]:
                f = m[i][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[rix])]
        pivots.append(col)
        rix += 1
    free = [c for c in range(r) if c not in pivots]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * r
        v[fcol] = Fraction(1)
        for i, pcol in enumerate(pivots):
            v[pcol] = -m[i][fcol]
        basis.append(DivisorClass(surf, tuple(v)))
    return basis


def _unit(r, j):
    v = [0] * r
    v[j] = 1
    return v


def _definite_bounds(basis, B):
    """Coefficient bounds for sum z_i b_i with -(sum z_i b_i)^2 <= B.

    The span of ``basis`` must be negative definite.
    """
    k = len(basis)
    if k == 0:
        return []
    Q = [[-basis[i].pair(basis[j]) for j in range(k)] for i in range(k)]
    bounds = []
    for i in range(k):
        e = [0] * k
        e[i] = 1
        col = _solve(Q, e)
        qi = col[i]
        if qi <= 0:
            raise GeometryError("orthogonal complement is not negative definite")
        bounds.append(math.sqrt(float(B * qi)) + 1e-9)
    return bounds


def _box_points(surf, c1, center_terms, B_coef):
    """Integral points xi = c1 mod 2 in the box spanned by bounded coefficients.

    center_terms: list of (class, coefficient bound) pairs with xi = sum t*class.
    """
    r = surf.rank
    lo, hi = [], []
    for i in range(r):
        ext = sum(abs(float(cl.coords[i])) * b for cl, b in center_terms)
        lo.append(math.floor(-ext - 1e-9))
        hi.append(math.ceil(ext + 1e-9))
    ranges = []
    for i in range(r):
        p = int(c1.coords[i]) % 2
        start = lo[i] + ((p - lo[i]) % 2)
        ranges.append(range(start, hi[i] + 1, 2))
    for pt in itertools.product(*ranges):
        yield surf.cls(*pt)


def enumerate_walls(surf: Surface, c1: DivisorClass, H_from: DivisorClass, H_to: DivisorClass,
                    L: DivisorClass, d_max: int, vanishing_filter: bool = True) -> list:
    """Classes xi = c1 (mod 2) with <xi,H_to> > 0 > <xi,H_from> and -xi^2 <= d_max.

    With ``vanishing_filter`` classes with -xi^2 > |<xi, L-K>| + 2 are dropped.
    """
    if surf.rank > 3:
        raise GeometryError("wall enumeration supports rank <= 3 only")
    _require_line_bundle(c1, "c1")
    _require_line_bundle(L, "L")
    for H in (H_from, H_to):
        if H.square < 0 or not _positive_side(H):
            raise GeometryError(f"{H} is not in the closed positive cone")
    if surf.rank == 1:
        return []
    a, b, c = H_from.square, H_to.square, H_from.pair(H_to)
    det = a * b - c * c
    if c <= 0 or det >= 0:
        if det == 0 and c > 0:
            return []  # proportional polarizations: nothing in between
        raise GeometryError(f"cannot bound walls between {H_from} and {H_to}")
    B = Fraction(d_max)
    ad = -det
    gs, gt = _granularity(c1, H_from), _granularity(c1, H_to)
    if gs == 0 or gt == 0:
        return []
    smax = B * ad * 1 / (2 * c * gt)
    tmax = B * ad * 1 / (2 * c * gs)
    if b > 0:
        smax = min(smax, Fraction(math.isqrt(int(B * ad / b) + 1) + 1))
    if a > 0:
        tmax = min(tmax, Fraction(math.isqrt(int(B * ad / a) + 1) + 1))
    # xi_V = x H_from + y H_to with (s, t) = gram_V (x, y)
    inv = [[b / det, -c / det], [-c / det, a / det]]
    xb = float(abs(inv[0][0]) * smax + abs(inv[0][1]) * tmax)
    yb = float(abs(inv[1][0]) * smax + abs(inv[1][1]) * tmax)
    terms = [(H_from, xb), (H_to, yb)]
    perp = _orth_basis(surf, [H_from, H_to])
    for v, zb in zip(perp, _definite_bounds(perp, B)):
        terms.append((v, zb))
    out = []
    seen = set()
    for xi in _box_points(surf, c1, terms, B):
        s, t = xi.pair(H_from), xi.pair(H_to)
        if not (s < 0 < t):
            continue
        sq = xi.square
        if sq >= 0 or -sq > d_max:
            continue
        if vanishing_filter and not passes_vanishing(xi, L):
            continue
        if xi.coords in seen:
            continue
        seen.add(xi.coords)
        out.append(make_wall(xi, L, d_max))
    out.sort(key=lambda w: (-w.square, w.xi.coords))
    return out


def walls_on(surf: Surface, c1: DivisorClass, H: DivisorClass, L: DivisorClass, d_max: int,
             toward: DivisorClass | None = None, vanishing_filter: bool = True) -> list:
    """Classes of type (c1, d <= d_max) orthogonal to H.

    With ``toward`` = v only classes with <xi, v> < 0 are kept, i.e. those with
    <xi, H + eps*v> < 0 for the adjacent chamber H + eps*v.
    """
    if surf.rank > 3:
        raise GeometryError("wall enumeration supports rank <= 3 only")
    _require_line_bundle(c1, "c1")
    _require_line_bundle(L, "L")
    if H.square <= 0:
        raise GeometryError(f"{H} is not ample enough: walls through an isotropic class "
                            "are not finite in number")
    perp = _orth_basis(surf, [H])
    terms = list(zip(perp, _definite_bounds(perp, Fraction(d_max))))
    out = []
    for xi in _box_points(surf, c1, terms, d_max):
        if xi.pair(H) != 0:
            continue
        sq = xi.square
        if sq >= 0 or -sq > d_max:
            continue
        if vanishing_filter and not passes_vanishing(xi, L):
            continue
        if toward is not None:
            side = xi.pair(toward)
            if side == 0:
                raise GeometryError(f"tie-break direction {toward} is orthogonal to wall {xi}")
            if side > 0:
                continue
        out.append(make_wall(xi, L, d_max))
    out.sort(key=lambda w: (-w.square, w.xi.coords))
    return out


def _positive_side(H: DivisorClass) -> bool:
    """H lies in the closure of the positive cone component containing ample classes."""
    s = H.surface
    if H.is_zero():
        return False
    ref = {"P2": (1,), "P1xP1": (1, 1), "P2hat": (2, -1)}.get(s.name)
    if ref is None:
        ref = [0] * s.rank
        ref[0] = 3
        for i in range(1, s.rank):
            ref[i] = -1
        if s.name == "Bl1P1xP1":
            ref = [3, 3, -1]
    return s.form(H.coords, ref) > 0
