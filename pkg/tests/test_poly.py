import math
import random
from fractions import Fraction

import pytest

from twoadic_lift.padic import PrecisionExhausted, RingCtx, teichmuller, two_power
from twoadic_lift.poly import (
    CentersCollide,
    DegreeOutOfRange,
    RPoly,
    mixed_table,
    newton_polygon,
    partial_fraction_mixed,
    partial_fraction_simple,
    poly_arith,
    recombine_mixed,
    recombine_simple,
    simple_table,
    squared_identity_residual_mixed,
    squared_identity_residual_simple,
)
from twoadic_lift.residue_field import field

CTX = RingCtx.make(field(5), 8)


def centers(k, seed):
    rng = random.Random(seed)
    return [teichmuller(CTX, CTX.field(v)) for v in rng.sample(range(1, 32), k)]


def exact(p: RPoly) -> bool:
    return all(c.valuation_lower_bound() >= Fraction(CTX.N, CTX.M) - 1 for c in p.coeffs)


def test_arithmetic_and_eval():
    X = RPoly.X(CTX)
    p = (X + 1) * (X - 3)
    assert p.degree == 2
    assert p.eval(CTX(3)).is_zero()
    assert (p.derivative() - (X * 2 - 2)).coeffs == []
    q = p.shift_center(CTX(1))  # p(X + 1) = (X + 2)(X - 2)
    assert (q - (X * X - 4)).coeffs == []
    quo, rem = p.divmod_linear(CTX(-1))
    assert rem.is_zero() and (quo - (X - 3)).coeffs == []
    assert (poly_arith("mul", p, X) - p * X).coeffs == []


def test_from_roots_vieta():
    roots = [CTX(2), CTX(5), CTX(-3)]
    p = RPoly.from_roots(CTX, roots)
    assert (p[0] + 2 * 5 * -3).is_zero()
    assert (p[2] + 4).is_zero()


@pytest.mark.parametrize("seed", range(10))
def test_simple_partial_fractions(seed):
    xs = centers(4, seed)
    for ell in range(4):
        g = partial_fraction_simple(xs, ell)
        assert exact(recombine_simple(xs, g, ell))
        res = squared_identity_residual_simple(xs, g, ell)
        assert res.degree <= 2 * len(xs) - 1
        assert res.min_coeff_valuation() >= 1


@pytest.mark.parametrize("r,s", [(1, 0), (1, 2), (2, 1), (2, 3)])
def test_mixed_partial_fractions(r, s):
    xs = centers(r + s, r * 10 + s)
    dc, sc = xs[:r], xs[r:]
    n = 2 * r + s
    for ell in range(n):
        a, b, g = partial_fraction_mixed(dc, sc, ell)
        assert exact(recombine_mixed(dc, sc, a, b, g, ell))
        res = squared_identity_residual_mixed(dc, sc, a, b, g, ell)
        assert res.degree <= 2 * n - 1
        assert res.min_coeff_valuation() >= 1


def test_tables_and_errors():
    xs = centers(3, 1)
    assert len(simple_table(xs).rows) == 3
    assert len(mixed_table(xs[:1], xs[1:]).rows) == 4
    with pytest.raises(DegreeOutOfRange):
        partial_fraction_simple(xs, 3)
    with pytest.raises(CentersCollide):
        partial_fraction_simple([xs[0], xs[0] + 2, xs[1]], 0)
    with pytest.raises(DegreeOutOfRange):
        partial_fraction_mixed([], xs, 0)


def test_newton_polygon_zero_root():
    X = RPoly.X(CTX)
    npg = newton_polygon(X * X - X * 2)  # roots 0 and 2
    assert npg.root_valuations() == [1, math.inf]


def test_newton_polygon_slopes():
    X = RPoly.X(CTX)
    p = (X - 2) * (X - 4) * (X - two_power(CTX, Fraction(3, 8)))
    npg = newton_polygon(p)
    assert npg.slope_multiset() == {Fraction(3, 8): 1, Fraction(1): 1, Fraction(2): 1}


def test_newton_polygon_unit_roots():
    npg = newton_polygon(RPoly.from_roots(CTX, centers(3, 2)))
    assert npg.root_valuations() == [0, 0, 0]


def test_newton_polygon_needs_precision():
    low = CTX.zero(1)  # a coefficient only known to be 0 mod pi
    p = RPoly(CTX, [CTX(1), low, CTX(1)])
    p.coeffs[1] = low
    npg = newton_polygon(p)
    assert npg.root_valuations() == [0, 0]
    with pytest.raises(PrecisionExhausted):
        newton_polygon(RPoly(CTX, []))


def test_json_round_trip():
    p = RPoly.from_roots(CTX, centers(3, 4))
    q = RPoly.from_json(CTX, p.to_json())
    assert exact(p - q)
