"""Slow, independent reference implementations used only by the tests."""
from __future__ import annotations

from fractions import Fraction

import sympy


def sympy_irreducible(f: int) -> bool:
    x = sympy.symbols("x")
    d = f.bit_length() - 1
    poly = sympy.Poly([(f >> i) & 1 for i in range(d, -1, -1)], x, modulus=2)
    return poly.is_irreducible


def sympy_least_irreducible(d: int) -> int:
    for f in range(1 << d, 1 << (d + 1)):
        if sympy_irreducible(f):
            return f
    raise AssertionError


class NaiveRing:
    """GR(2^P, d)[pi] / (pi^M - 2) with schoolbook arithmetic on nested lists."""

    def __init__(self, modulus: int, d: int, M: int, P: int):
        self.d, self.M, self.P = d, M, P
        self.q = 1 << P
        self.lift = [(modulus >> i) & 1 for i in range(d + 1)]

    def gr_mul(self, a, b):
        out = [0] * (2 * self.d - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                out[i + j] += x * y
        for k in range(len(out) - 1, self.d - 1, -1):
            c = out[k]
            if c:
                for i in range(self.d + 1):
                    out[k - self.d + i] -= c * self.lift[i]
        return [v % self.q for v in out[: self.d]]

    def mul(self, x, y):
        out = [[0] * self.d for _ in range(self.M)]
        for i, a in enumerate(x):
            for j, b in enumerate(y):
                p = self.gr_mul(a, b)
                k, scale = i + j, 1
                if k >= self.M:
                    k, scale = k - self.M, 2
                out[k] = [(u + scale * v) % self.q for u, v in zip(out[k], p)]
        return out

    def add(self, x, y):
        return [[(u + v) % self.q for u, v in zip(a, b)] for a, b in zip(x, y)]


def solve_thickness(m1: int, m2: int, m3: int) -> dict:
    """Solve the per-point metric equations for the thickness unknowns with sympy."""
    e0, e12, e23, s1, s23 = sympy.symbols("e0 e12 e23 s1 s23")
    e1 = sympy.Rational(1, 2)
    eqs = [
        m1 * e0 + 3 * e1 + 3 * e12 + e23 - 2,
        m2 * e0 + 3 * e1 + e12 + e23 - 2,
        m3 * e0 + 3 * e1 + e12 - 2,
        m2 * e0 + s1 + s23 - 2,
        m3 * e0 + s1 - 2,
    ]
    sol = sympy.solve(eqs, [e0, e12, e23, s1, s23], dict=True)[0]
    return {k: Fraction(str(v)) for k, v in
            {"eps0": sol[e0], "eps12": sol[e12], "eps23": sol[e23], "eps1_sat": sol[s1],
             "eps23_sat": sol[s23]}.items()}
