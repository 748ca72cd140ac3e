from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from wallcross.geometry import P1XP1, P2, P2HAT, GeometryError, parse_class, surface
from wallcross.invariants import (blowdown_p2, blowup_poly, chi_at, chi_fplus, chi_gplus,
                                  closed_form, convention_constant, kdon_convention, lam_sym,
                                  strange_duality_dims, verify_blowup_identity, x_sym)
from wallcross.lpoly import LambdaPoly
from wallcross.series import SeriesError
from wallcross.verify import P22_RAW, P22_THEOREM, p11t_check

D = 21
L4 = LambdaPoly({4: 1}, None)
RULED = ("P1xP1", "P2hat")


# --- boundary kernels: the propositions without the Lambda^4 convention -----


@pytest.mark.parametrize("name", RULED)
@pytest.mark.parametrize("n", range(0, 5))
def test_fplus_fibre_degree(ctx, name, n):
    X = surface(name)
    rhs = closed_form(f"1/(1-L^4)^({n}+1)", D)
    assert 1 + chi_fplus(ctx, X, "F", n, 0, D).series == rhs
    assert 1 + (2 * n + 5) * L4 + chi_fplus(ctx, X, "0", n, 0, D).series == rhs


@pytest.mark.parametrize("name", RULED)
@pytest.mark.parametrize("j", range(0, 4))
def test_fplus_section_degree_one(ctx, name, j):
    X = surface(name)
    n = j if name == "P1xP1" else Fraction(2 * j + 1, 2)
    rhs = closed_form(f"1/(1-L^4)^({int(2 * n + 2)})", D)
    assert 1 + (3 * n + 7) * L4 + chi_fplus(ctx, X, "0", n, 1, D).series == rhs


@pytest.mark.parametrize("name", RULED)
@pytest.mark.parametrize("n", range(0, 4))
def test_fplus_section_degree_two(ctx, name, n):
    X = surface(name)
    k = 3 * n + 3
    odd = closed_form(f"((1+L^4)^{n}-(1-L^4)^{n})/2/(1-L^4)^({k})", D)
    even = closed_form(f"((1+L^4)^{n}+(1-L^4)^{n})/2/(1-L^4)^({k})", D)
    assert chi_fplus(ctx, X, "F", n, 2, D).series == odd
    assert 1 + (4 * n + 9) * L4 + chi_fplus(ctx, X, "0", n, 2, D).series == even


def test_fplus_odd_fibre_degree_vanishes(ctx16):
    X = P2HAT
    g = chi_fplus(ctx16, X, X.basis("E"), 1, 2, 12)
    assert g.series == LambdaPoly({}, 12)


def test_fplus_rejects_non_line_bundles(ctx16):
    with pytest.raises(GeometryError):
        chi_fplus(ctx16, P1XP1, "0", Fraction(1, 2), 1, 8)
    with pytest.raises(GeometryError):
        chi_fplus(ctx16, P2, "0", 1, 1, 8)


@pytest.mark.parametrize("n, m", [(0, 1), (1, 2), (2, 0), (3, 1), (1, 3)])
def test_gplus_symmetry_by_wallcrossing(ctx16, n, m):
    # chi^{G+}_0(nF+mG) via the walls from F towards G equals chi^{F+}_0(mF+nG)
    X = P1XP1
    L = parse_class(f"{n}F+{m}G", X)
    near_G = X.basis("F") + X.basis("G") * 17
    g = chi_at(ctx16, X, X.zero(), L, near_G, 16, fibre=X.basis("F"))
    assert g.series == chi_fplus(ctx16, X, "0", m, n, 16).series
    assert chi_gplus(ctx16, "0", n, m, 16).series == g.series


# --- chambers and the Lambda^4 convention ------------------------------------


def test_chi_at_tags_and_errors(ctx16):
    X = P1XP1
    L = parse_class("2F", X)
    assert chi_at(ctx16, X, X.zero(), L, "F+", 12).polarization == "F+"
    with pytest.raises(GeometryError):
        chi_at(ctx16, X, X.basis("F"), parse_class("F+G", X), "F+", 12)
    with pytest.raises(GeometryError):
        chi_at(ctx16, P2, P2.zero(), P2.basis("H"), P2.basis("H"), 12)


def test_convention_constant():
    assert convention_constant(P2, P2.basis("H")) == -9
    assert convention_constant(P1XP1, P1XP1.zero()) == -5


@pytest.mark.parametrize("name, fam, n", [("P1xP1", "10", 2), ("P2hat", "10", 3),
                                          ("P2hat", "2", Fraction(3, 2)), ("P1xP1", "30", 1)])
def test_theorem_convention_samples(ctx, name, fam, n):
    th, expected = p11t_check(ctx, name, fam, n, D)
    assert th.series == expected
    assert th.convention == "theorem"
    assert "constant" in th.routes
    if name == "P2hat":
        assert th.routes["blowup"] == th.routes["constant"]


def test_kdon_identity_only_on_zero_c1(ctx16):
    X = P1XP1
    g = chi_at(ctx16, X, X.basis("F"), X.zero(), "F+", 12)
    with pytest.raises(GeometryError):
        kdon_convention(ctx16, g)


def test_kdon_leaves_other_degrees(ctx16):
    X = P2HAT
    g = chi_at(ctx16, X, X.zero(), parse_class("H", X), parse_class("5H-E", X), 16)
    th = kdon_convention(ctx16, g)
    diff = th.series - g.series
    assert set(diff.coeffs) <= {4}
    with pytest.raises(GeometryError):
        kdon_convention(ctx16, th)


# --- P2 ------------------------------------------------------------------------


@pytest.mark.parametrize("key", sorted(P22_RAW))
def test_p2_pipelines(ctx, key):
    c1, k = key
    g = blowdown_p2(ctx, c1, k, 19)
    assert g.series == closed_form(P22_RAW[key], 19)
    assert g.routes["on-wall"].truncate(19) == g.routes["blowdown"].truncate(19)
    th = kdon_convention(ctx, g) if c1 == "0" else g
    assert th.series == closed_form(P22_THEOREM[key], 19)
    if c1 == "0":
        assert th.routes["blowup"] == th.routes["constant"]


def test_p2_c1_H_needs_even_k(ctx16):
    with pytest.raises(GeometryError):
        blowdown_p2(ctx16, "H", 1, 12)
    with pytest.raises(GeometryError):
        blowdown_p2(ctx16, "E", 2, 12)


def test_smoke_table_p2hat_c1_E(ctx16):
    # the E-column of the P2hat tables starts with chi(M(E, 5), mu(L)) at Lambda^5
    X = P2HAT
    g = chi_at(ctx16, X, X.basis("E"), X.zero(), (X.basis("H"), -X.basis("E")), 13)
    assert all(d % 4 == 1 for d in g.series.coeffs)


# --- blowup polynomials -----------------------------------------------------------


@pytest.mark.parametrize("n", range(-12, 13))
def test_blowup_polynomials_divide_exactly(n):
    bp = blowup_poly(n)
    assert sympy.Poly(bp.R, lam_sym, x_sym).domain == sympy.ZZ


def test_blowup_polynomials_printed():
    lam, x = lam_sym, x_sym
    assert sympy.expand(blowup_poly(3).R - (-lam ** 4 * x ** 2 + (1 - lam ** 4) ** 2)) == 0
    assert sympy.expand(blowup_poly(3).S - lam * (x ** 2 - (1 - lam ** 4) ** 2)) == 0
    assert sympy.expand(blowup_poly(4).S -
                        lam * x * ((1 - lam ** 8) * x ** 2 - 2 * (1 - lam ** 4) ** 3)) == 0
    assert (blowup_poly(0).R, blowup_poly(1).R, blowup_poly(1).S) == (1, 1, lam)
    with pytest.raises(SeriesError):
        blowup_poly(13)


@pytest.mark.parametrize("n", range(-4, 5))
def test_blowup_identity(ctx, n):
    rep = verify_blowup_identity(ctx, n, 12)
    assert rep["ok"], rep


def test_blowup_identity_reports_mismatch(ctx, monkeypatch):
    import wallcross.invariants as inv
    real = inv.blowup_poly
    monkeypatch.setattr(inv, "blowup_poly",
                        lambda n: inv.BlowupPoly(n, real(n).R + lam_sym ** 8, real(n).S))
    rep = verify_blowup_identity(ctx, 2, 12)
    assert not rep["ok"] and rep["first_mismatch"]["d"] == 8


# --- closed forms ---------------------------------------------------------------------


def test_closed_form_examples():
    assert closed_form("1/(1-L^4)^1", 12) == LambdaPoly({0: 1, 4: 1, 8: 1, 12: 1}, 12)
    half = closed_form("1/2*((1+L^4)^2-(1-L^4)^2)/(1-L^4)^9", 8)
    assert half[4] == 2 and half[0] == 0
    with pytest.raises(SeriesError):
        closed_form("1/(1-L^4)^(1/2)", 8)
    with pytest.raises(SeriesError):
        closed_form("sin(L)", 8)


@settings(max_examples=25)
@given(st.integers(0, 8), st.integers(1, 8))
def test_closed_form_binomial(a, k):
    s = closed_form(f"1/(1-L^4)^{k}", 4 * a)
    assert s[4 * a] == sympy.binomial(a + k - 1, a)


def test_strange_duality_dims():
    assert all(a == b for _, a, b in strange_duality_dims(10))
