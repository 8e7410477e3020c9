import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import NaiveRing
from twoadic_lift.padic import (
    DivisionByNearZero,
    ExponentNotRepresentable,
    NeedsFieldExtension,
    NotASquare,
    OddValuation,
    RElem,
    RingCtx,
    r_arith,
    r_reduce,
    r_root,
    r_sqrt,
    r_valuation,
    teichmuller,
    two_power,
)
from twoadic_lift.residue_field import ff_extend, field


def ctx_for(d=3, M=8, pf=1):
    return RingCtx.make(field(d), M, pf)


def random_elem(ctx, rng, unit=True):
    digits = [[rng.randrange(ctx.mod) for _ in range(ctx.d)] for _ in range(ctx.M)]
    if unit:
        while not any(v & 1 for v in digits[0]):
            digits[0] = [rng.randrange(ctx.mod) for _ in range(ctx.d)]
    return RElem.from_digits(ctx, 0, digits), digits


def test_pi_to_the_M_is_two():
    for M in (1, 2, 4, 8, 12):
        ctx = ctx_for(3, M)
        d = ctx.pi ** M - 2
        assert d.is_zero() and d.valuation_lower_bound() >= Fraction(ctx.N, ctx.M)


@pytest.mark.parametrize("d,M", [(1, 4), (2, 2), (3, 8), (5, 4)])
def test_multiplication_against_schoolbook(d, M):
    ctx = ctx_for(d, M)
    naive = NaiveRing(ctx.field.modulus, d, M, ctx.P)
    rng = random.Random(d * 100 + M)
    for _ in range(25):
        x, dx = random_elem(ctx, rng)
        y, dy = random_elem(ctx, rng)
        expect = RElem.from_digits(ctx, 0, naive.mul(dx, dy))
        assert (x * y - expect).valuation_lower_bound() >= Fraction(ctx.N, ctx.M)
        expect = RElem.from_digits(ctx, 0, naive.add(dx, dy))
        assert (x + y - expect).valuation_lower_bound() >= Fraction(ctx.N, ctx.M)


def test_integers_embed_correctly():
    ctx = ctx_for(3, 4)
    for a in (-7, 0, 1, 3, 1024, 12345):
        for b in (-5, 1, 6, 77):
            assert (ctx(a) * ctx(b) - ctx(a * b)).is_zero()
            assert (ctx(a) + ctx(b) - ctx(a + b)).is_zero()
    assert r_valuation(ctx(1024)) == 10
    assert r_valuation(ctx(12)) == 2


@given(st.integers(1, 10**6), st.integers(1, 10**6))
def test_division_of_odd_integers(a, b):
    ctx = ctx_for(2, 4)
    q = ctx(a) / ctx(b)
    assert (q * b - a).valuation_lower_bound() >= Fraction(ctx.N, ctx.M) - 1


def test_fraction_coercion_and_valuations():
    ctx = ctx_for(3, 6)
    assert r_valuation(ctx(Fraction(3, 4))) == -2
    assert r_valuation(two_power(ctx, Fraction(5, 6))) == Fraction(5, 6)
    with pytest.raises(ExponentNotRepresentable):
        two_power(ctx, Fraction(1, 4))


def test_teichmuller_is_multiplicative_and_q_torsion():
    ctx = ctx_for(3, 4)
    F = ctx.field
    for a in F.elements():
        ta = teichmuller(ctx, a)
        if a:
            assert (ta ** 8 - ta).is_zero()
            assert r_reduce(ta) == a
        for b in F.elements():
            assert (teichmuller(ctx, a) * teichmuller(ctx, b) - teichmuller(ctx, a * b)).is_zero()


def test_relative_precision_is_capped():
    ctx = ctx_for(3, 4)
    x = ctx.pi.shift(3)
    assert x.val == 4 and x.rp == ctx.N
    y = x.with_relprec(5)
    assert y.absprec == 9
    z = y + ctx.pi ** 20
    assert z.absprec == 9


def test_division_by_near_zero():
    ctx = ctx_for(3, 4)
    with pytest.raises(DivisionByNearZero):
        ctx.one / ctx.zero()


@pytest.mark.parametrize("d,M", [(3, 8), (5, 12), (2, 4)])
def test_sqrt_round_trip(d, M):
    ctx = ctx_for(d, M)
    rng = random.Random(d + M)
    for _ in range(20):
        u, _ = random_elem(ctx, rng)
        w = r_sqrt(u * u)
        res = w * w - u * u
        assert res.valuation_lower_bound() >= Fraction(ctx.N - ctx.M, ctx.M)


def test_sqrt_obstructions():
    ctx = ctx_for(3, 4)
    with pytest.raises(OddValuation):
        r_sqrt(ctx.pi)
    with pytest.raises(NotASquare):
        r_sqrt(ctx.one + ctx.pi)


def test_sqrt_trace_obstruction_then_doubling():
    small = RingCtx.make(field(1), 4)
    with pytest.raises(NeedsFieldExtension):
        r_sqrt(small(5))
    big, _ = ff_extend(field(1), 2)
    ctx = RingCtx.make(big, 4)
    w = r_sqrt(ctx(5))
    assert (w * w - 5).valuation_lower_bound() >= Fraction(ctx.N - ctx.M, ctx.M)


def test_sqrt_with_target_precision():
    ctx = ctx_for(3, 8)
    u = ctx.one + ctx.pi ** 4 * 3 + ctx.pi ** 12
    w = r_sqrt(u, prec=ctx.M)
    assert (w * w - u).valuation_lower_bound() >= 1


@pytest.mark.parametrize("n", [3, 5])
def test_odd_roots(n):
    ctx = ctx_for(3, 8)
    rng = random.Random(n)
    for _ in range(15):
        u, _ = random_elem(ctx, rng)
        y = r_root(u, n)
        assert (y ** n - u).valuation_lower_bound() >= Fraction(ctx.N - ctx.M, ctx.M)


def test_serialization_round_trip():
    ctx = ctx_for(3, 8)
    rng = random.Random(5)
    for _ in range(10):
        u, _ = random_elem(ctx, rng)
        x = u.shift(rng.randrange(20))
        back = RElem.from_json(ctx, x.to_json())
        assert (back - x).valuation_lower_bound() >= Fraction(x.absprec, ctx.M)
    z = ctx.zero(17)
    assert RElem.from_json(ctx, z.to_json()).absprec == 17


def test_r_arith_dispatch():
    ctx = ctx_for(3, 4)
    a, b = ctx(3), ctx(5)
    assert (r_arith("add", a, b) - 8).is_zero()
    assert (r_arith("mul", a, b) - 15).is_zero()
    assert (r_arith("sub", a, b) + 2).is_zero()
    assert (r_arith("div", a, b) * 5 - 3).is_zero()
    with pytest.raises(ValueError):
        r_arith("pow", a, b)
