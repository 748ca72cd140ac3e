from fractions import Fraction

import pytest

from wallcross.modular import build_context, context_for, default_window, nullwerte
from wallcross.series import BiSeries, GaussianRational, SeriesError
from wallcross.verify import suite_modular, suite_theth

I = GaussianRational(0, 1)


def test_jacobi_identity_through_q64():
    t2, t3, t4 = nullwerte(64)
    assert t2.max_valid == 64
    assert (t2 ** 4 + t4 ** 4 - t3 ** 4).is_zero()


def test_u_expansion(ctx):
    u4 = ctx.u.shift(2).scale(4)
    assert [u4[k] for k in (0, 4, 8, 12, 16)] == [-1, -20, 62, -216, 641]
    assert all(u4[k] == 0 for k in (1, 2, 3, 5))


def test_h_and_zeta_expansions(ctx):
    assert [ctx.h[1, k] for k in (-1, 3, 7)] == [I, I * -2, I * 3]
    assert [ctx.h[3, k] for k in (-3, 1, 5)] == \
        [I * Fraction(1, 24), I * Fraction(3, 4), I * Fraction(-33, 8)]
    assert [ctx.zeta[1, k] for k in (-1, 3, 7)] == [I, I * -2, I * 3]
    assert [ctx.zeta[3, k] for k in (1, 5)] == [I, I * -5]
    assert [ctx.zeta[5, k] for k in (3, 7)] == [I * 2, I * -17]


def test_internal_identities(ctx):
    assert ctx.checks() == {"jacobi": True, "uprime": True, "M_squared": True,
                            "hstar": True, "lambda": True}


def test_theta_quotient_recovers_lambda(ctx):
    quotient = ctx.theta1h * ctx.theta4h.invert()
    assert (quotient - BiSeries.lam(ctx.D)).is_zero()


def _in_shifted_ring(s, step_q, step_l, bound):
    """Every monomial lies in Q[q^step_q Lambda^step_l]_{<=bound} R."""
    for (d, k), _ in s.terms():
        ok = False
        for j in range(0, bound + 1):
            dd, kk = d - j * step_l, k - j * step_q
            if dd >= 0 and dd % 2 == 0 and (kk - dd) >= 0 and (kk - dd) % 4 == 0:
                ok = True
                break
        if not ok:
            return False
    return True


def test_zeta_and_inverse_support(ctx16):
    assert ctx16.zeta.support_ok(q_shift=-1, lam_shift=1)
    assert ctx16.zeta.invert().support_ok(q_shift=1, lam_shift=-1)


@pytest.mark.parametrize("n", range(0, 5))
def test_sinh_cosh_support(ctx16, n):
    m = 2 * n + 1
    assert _in_shifted_ring(ctx16.kernel("sinh", m), -1, 1, m)
    if n:
        assert _in_shifted_ring(ctx16.kernel("cosh", 2 * n), -2, 2, n)


def test_sinh_half_is_half_zeta(ctx):
    assert (ctx.kernel("sinh", 1).scale(2) - ctx.zeta).is_zero()


@pytest.mark.parametrize("n", [1, 2, 3])
def test_theta1_odd_in_n(ctx16, n):
    a = ctx16.theta_of_h("tilde1", n)
    b = ctx16.theta_of_h("tilde1", -n)
    assert (a + b).is_zero()


@pytest.mark.parametrize("n", [1, 2, 3])
def test_theta4_even_in_n(ctx16, n):
    assert (ctx16.theta_of_h("tilde4", n) - ctx16.theta_of_h("tilde4", -n)).is_zero()


def test_kernel_relations(ctx16):
    one = BiSeries.one(ctx16.D)
    c, s = ctx16.kernel("cosh", 3), ctx16.kernel("sinh", 3)
    assert (c * c - s * s - one).is_zero()
    assert (ctx16.kernel("coth", 2) * ctx16.kernel("tanh", 2) - one).is_zero()


def test_kernel_errors(ctx16):
    with pytest.raises(SeriesError):
        ctx16.kernel("coth", 0)
    with pytest.raises(SeriesError):
        ctx16.kernel("sech", 1)
    with pytest.raises(SeriesError):
        ctx16.theta_of_h("tilde1", 0)


def test_named_series_and_json(ctx16):
    for name in ("u", "h", "hstar", "uprime", "zeta", "M", "theta4h", "theta1h"):
        s = ctx16.named(name)
        assert (BiSeries.from_json(s.to_json()) - s).is_zero()
    with pytest.raises(SeriesError):
        ctx16.named("v")


def test_contexts_are_shared():
    assert build_context(8) is build_context(8)
    assert context_for(8) is build_context(8, default_window(8))
    with pytest.raises(SeriesError):
        build_context(8, 10)


def test_uprime_closed_form(ctx):
    assert ctx.uprime.equals(ctx.uprime_closed)


def test_modular_suite_passes():
    assert suite_modular(24)["ok"]


def test_theth_suite_reports_q3_row():
    rep = suite_theth(18)
    assert rep["ok"], rep
    item1 = rep["checks"][0]
    assert item1["name"] == "item 1"
    # theta~_4(h) has no q^3 terms at all: the stronger O(q^4) form holds
    assert item1["q3_terms"] == {}
