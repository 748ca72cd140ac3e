"""Kronecker substitution for products of integer-coefficient series.

A bivariate block of integer coefficients (rows indexed by the Lambda degree,
columns by the q exponent) is packed into a single big integer, multiplied
once, and unpacked.  Rows are sheared by ``beta`` so that series whose support
drifts linearly with the degree pack densely.
"""

from __future__ import annotations

try:
    import gmpy2

    _mpz = gmpy2.mpz
except ImportError:  # pragma: no cover
    _mpz = None


def _bigmul(x: int, y: int) -> int:
    if _mpz is None or x.bit_length() < 20000 or y.bit_length() < 20000:
        return x * y
    return int(_mpz(x) * _mpz(y))


def _span(ranges, beta):
    lo = min(r[0] - beta * d for d, r in ranges.items())
    hi = max(r[1] - beta * d for d, r in ranges.items())
    return lo, hi


class Layout:
    """Slot geometry shared by the two factors of one product."""

    __slots__ = ("beta", "a_d0", "b_d0", "a_j0", "b_j0", "stride", "nb",
                 "a_rows", "b_rows", "bias")
    # a product slot (e, k) lives in row e at column k - beta*e - (a_j0 + b_j0)

    def __init__(self, a_ranges: dict, b_ranges: dict, coeff_bits: int):
        # a_ranges / b_ranges: degree -> (lowest, highest) stored q exponent
        best = None
        for beta in range(-6, 7):
            alo, ahi = _span(a_ranges, beta)
            blo, bhi = _span(b_ranges, beta)
            cost = (ahi - alo) + (bhi - blo)
            if best is None or cost < best[0]:
                best = (cost, beta, alo, ahi, blo, bhi)
        _, self.beta, alo, ahi, blo, bhi = best
        self.a_j0, self.b_j0 = alo, blo
        self.stride = (ahi - alo) + (bhi - blo) + 1
        self.a_d0, self.b_d0 = min(a_ranges), min(b_ranges)
        self.a_rows = max(a_ranges) - self.a_d0 + 1
        self.b_rows = max(b_ranges) - self.b_d0 + 1
        self.nb = (coeff_bits + 8) // 8
        self.bias = None

    def pack(self, rows: dict, side: str) -> int:
        """rows: degree -> (lo, list of ints).  Returns the packed integer."""
        if side == "a":
            d0, j0, nrows = self.a_d0, self.a_j0, self.a_rows
        else:
            d0, j0, nrows = self.b_d0, self.b_j0, self.b_rows
        nb, beta, stride = self.nb, self.beta, self.stride
        size = nrows * stride * nb
        pos = bytearray(size)
        neg = bytearray(size)
        for d, (lo, cs) in rows.items():
            base = ((d - d0) * stride + lo - beta * d - j0) * nb
            for i, c in enumerate(cs):
                if c:
                    p = base + i * nb
                    if c > 0:
                        pos[p:p + nb] = c.to_bytes(nb, "little")
                    else:
                        neg[p:p + nb] = (-c).to_bytes(nb, "little")
        return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")

    def unpack(self, value: int, wanted: dict) -> dict:
        """Read product coefficients.  wanted: degree -> (k0, k1) inclusive."""
        nb, beta, stride = self.nb, self.beta, self.stride
        e0 = self.a_d0 + self.b_d0
        j0 = self.a_j0 + self.b_j0
        nslots = (self.a_rows + self.b_rows - 1) * stride
        if self.bias is None:
            self.bias = int.from_bytes((b"\x00" * (nb - 1) + b"\x80") * nslots, "little")
        half = 1 << (8 * nb - 1)
        raw = memoryview((value + self.bias).to_bytes(nslots * nb, "little"))
        frombytes = int.from_bytes
        out = {}
        for e, (k0, k1) in wanted.items():
            base = (e - e0) * stride - beta * e - j0
            first = max(k0, beta * e + j0)
            last = min(k1, beta * e + j0 + stride - 1)
            cs = [0] * (max(0, first - k0))
            for k in range(first, last + 1):
                p = (base + k) * nb
                cs.append(frombytes(raw[p:p + nb], "little") - half)
            cs += [0] * (k1 - k0 + 1 - len(cs))
            out[e] = cs
        return out


def _maxabs(rows: dict) -> int:
    m = 0
    for _, cs in rows.values():
        for c in cs:
            if c > m:
                m = c
            elif -c > m:
                m = -c
    return m


def _count(rows: dict) -> int:
    return sum(len(cs) for _, cs in rows.values())


def _ranges(*parts):
    out = {}
    for rows in parts:
        for d, (lo, cs) in rows.items():
            if not cs:
                continue
            hi = lo + len(cs) - 1
            if d in out:
                a, b = out[d]
                out[d] = (min(a, lo), max(b, hi))
            else:
                out[d] = (lo, hi)
    return out


def complex_product(a_re: dict, a_im: dict, b_re: dict, b_im: dict, wanted: dict):
    """Multiply (a_re + i a_im)(b_re + i b_im) and return (re, im) rows.

    Each argument maps degree -> (lo, ints).  Empty dicts are zero parts.
    The result dicts map degree -> list of ints over the wanted ranges.
    """
    zero = {e: [0] * (k1 - k0 + 1) for e, (k0, k1) in wanted.items()}
    ar = _ranges(a_re, a_im)
    br = _ranges(b_re, b_im)
    if not ar or not br or not wanted:
        return zero, dict(zero)
    ma = _maxabs(a_re) + _maxabs(a_im)
    mb = _maxabs(b_re) + _maxabs(b_im)
    n = min(_count(a_re) + _count(a_im), _count(b_re) + _count(b_im))
    bits = ma.bit_length() + mb.bit_length() + n.bit_length() + 2
    lay = Layout(ar, br, bits)
    Ar = lay.pack(a_re, "a") if a_re else 0
    Ai = lay.pack(a_im, "a") if a_im else 0
    Br = lay.pack(b_re, "b") if b_re else 0
    Bi = lay.pack(b_im, "b") if b_im else 0
    if Ai == 0 and Bi == 0:
        re, im = _bigmul(Ar, Br), 0
    elif Ar == 0 and Br == 0:
        re, im = -_bigmul(Ai, Bi), 0
    elif Ai == 0 and Br == 0:
        re, im = 0, _bigmul(Ar, Bi)
    elif Ar == 0 and Bi == 0:
        re, im = 0, _bigmul(Ai, Br)
    elif Ai == 0:
        re, im = _bigmul(Ar, Br), _bigmul(Ar, Bi)
    elif Bi == 0:
        re, im = _bigmul(Ar, Br), _bigmul(Ai, Br)
    elif Ar == 0:
        re, im = -_bigmul(Ai, Bi), _bigmul(Ai, Br)
    elif Br == 0:
        re, im = -_bigmul(Ai, Bi), _bigmul(Ar, Bi)
    else:
        t1 = _bigmul(Ar, Br)
        t2 = _bigmul(Ai, Bi)
        t3 = _bigmul(Ar + Ai, Br + Bi)
        re, im = t1 - t2, t3 - t1 - t2
    re_rows = lay.unpack(re, wanted) if re else zero
    im_rows = lay.unpack(im, wanted) if im else dict(zero)
    return re_rows, im_rows
