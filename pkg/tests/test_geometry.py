import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from wallcross.geometry import (P1XP1, P2, P2HAT, GeometryError, enumerate_walls, format_class,
                                parse_class, passes_vanishing, ruling_coords, surface, walls_on)

ALL = ("P2", "P1xP1", "P2hat", "Bl2P2", "Bl1P1xP1")


@pytest.mark.parametrize("name", ALL)
def test_surfaces_are_consistent(name):
    X = surface(name)
    assert X.check() == []
    assert X.K.square == 12 - X.euler   # Noether for rational surfaces


def test_parse_examples():
    assert parse_class("3H-E", P2HAT).coords == (3, -1)
    assert parse_class("2F+2G", P1XP1) == -P1XP1.K
    assert parse_class("(H+E)/2", P2HAT) == P2HAT.basis("G")
    assert parse_class("F", P2HAT) == parse_class("H-E", P2HAT)
    assert parse_class("0", P1XP1).is_zero()
    assert parse_class("2 (F + G) - G", P1XP1).coords == (2, 1)


@pytest.mark.parametrize("expr, name", [("F+G/2", "P1xP1"), ("Q", "P2hat"), ("H*E", "P2hat"),
                                        ("H+1", "P2hat"), ("H/0", "P2hat"), ("", "P2"),
                                        ("H/3", "P2hat"), ("3", "P2")])
def test_parse_errors(expr, name):
    with pytest.raises(GeometryError):
        parse_class(expr, surface(name))


def test_unknown_surface():
    with pytest.raises(GeometryError):
        surface("P3")


def test_p2hat_ruling():
    F, G = P2HAT.basis("F"), P2HAT.basis("G")
    assert (F.square, G.square, F.pair(G)) == (0, 0, 1)
    assert -P2HAT.K == F * 2 + G * 2
    assert ruling_coords(F * 3 + G * 4) == (3, 4)
    assert ruling_coords(parse_class("2F+2G", P1XP1)) == (2, 2)
    with pytest.raises(GeometryError):
        ruling_coords(P2.basis("H"))


def test_blowups():
    assert P2.blowup() is P2HAT
    B = P2HAT.blowup()
    assert B.labels == ("H", "E", "E2") and B.K.square == 7
    assert surface("Bl1P1xP1").rank == 3


coords = st.lists(st.integers(-6, 6), min_size=2, max_size=2)


@given(coords)
def test_format_parse_round_trip(c):
    for X in (P1XP1, P2HAT):
        cls = X.cls(*c)
        assert parse_class(format_class(cls), X) == cls


@given(coords, coords, coords)
def test_pairing_is_bilinear_and_symmetric(a, b, c):
    X = P1XP1
    A, B, C = X.cls(*a), X.cls(*b), X.cls(*c)
    assert (A + B).pair(C) == A.pair(C) + B.pair(C)
    assert A.pair(B) == B.pair(A)


def _brute(X, c1, H_from, H_to, L, d_max, R=14):
    out = set()
    for v in itertools.product(range(-R, R + 1), repeat=X.rank):
        xi = X.cls(*v)
        if not xi.congruent_mod2(c1):
            continue
        if not (xi.pair(H_from) < 0 < xi.pair(H_to)):
            continue
        if not (0 < -xi.square <= d_max) or not passes_vanishing(xi, L):
            continue
        out.add(xi.coords)
    return out


@pytest.mark.parametrize("name, c1, H_from, H_to, L", [
    ("P1xP1", "0", "F+3G", "5F+G", "F+2G"),
    ("P1xP1", "F", "F+G", "7F+2G", "2G"),
    ("P2hat", "0", "H-E", "3H-E", "H"),
    ("P2hat", "E", "2H-E", "5H-E", "2H"),
    ("P2hat", "H", "H-E", "4H-E", "H-E"),
    ("Bl1P1xP1", "E", "2F+2G-E", "3F+G-E", "F"),
])
def test_enumeration_matches_brute_force(name, c1, H_from, H_to, L):
    X = surface(name)
    p = lambda s: parse_class(s, X)
    d_max = 12
    got = {w.xi.coords for w in enumerate_walls(X, p(c1), p(H_from), p(H_to), p(L), d_max)}
    assert got == _brute(X, p(c1), p(H_from), p(H_to), p(L), d_max)


pol = st.tuples(st.integers(1, 9), st.integers(1, 9))


@settings(max_examples=40, deadline=None)
@given(pol, pol, st.sampled_from(["0", "F", "G", "F+G"]))
def test_enumeration_antisymmetry(a, b, c1):
    X = P1XP1
    A, B = X.cls(*a), X.cls(*b)
    if A.square * B.square == A.pair(B) ** 2:
        return
    C1, L = parse_class(c1, X), X.zero()
    fwd = {w.xi.coords for w in enumerate_walls(X, C1, A, B, L, 10)}
    back = {(-w.xi).coords for w in enumerate_walls(X, C1, B, A, L, 10)}
    assert fwd == back


def test_walls_on_and_tiebreak():
    X = P2HAT
    H, E = X.basis("H"), X.basis("E")
    ws = walls_on(X, X.zero(), H, H, 12)
    assert sorted(w.xi.coords for w in ws) == [(0, -2), (0, 2)]
    side = walls_on(X, X.zero(), H, H, 12, toward=-E)
    assert [w.xi.coords for w in side] == [(0, -2)]   # <xi, H - eps E> < 0
    with pytest.raises(GeometryError):
        walls_on(X, X.zero(), H, H, 12, toward=X.basis("F") + E)   # orthogonal to 2E
    with pytest.raises(GeometryError):
        walls_on(X, X.zero(), X.basis("F"), H, 12)


def test_wall_bookkeeping():
    X = P2HAT
    w = enumerate_walls(X, X.zero(), X.basis("F"), X.cls(3, -1), X.cls(3, -1), 12)
    assert all(x.xi.congruent_mod2(X.zero()) for x in w)
    for x in w:
        assert x.N == x.xi.pair(X.cls(3, -1) - X.K)
        assert x.d_range[0] == -x.square


def test_rank_one_has_no_walls():
    H = P2.basis("H")
    assert enumerate_walls(P2, P2.zero(), H, H * 2, H, 12) == []


def test_non_integral_input_rejected():
    X = P2HAT
    with pytest.raises(GeometryError):
        enumerate_walls(X, X.basis("G"), X.basis("F"), X.basis("H"), X.zero(), 8)
