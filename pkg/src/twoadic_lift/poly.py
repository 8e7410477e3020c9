"""Dense polynomials over R, partial fractions and Newton polygons."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .padic import PrecisionExhausted, RElem, RingCtx, r_valuation


class CentersCollide(ValueError):
    pass


class DegreeOutOfRange(ValueError):
    pass


class RPoly:
    """Polynomial with RElem coefficients, lowest degree first."""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: RingCtx, coeffs: Sequence):
        self.ctx = ctx
        cs = [ctx(c) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        self.coeffs = cs

    @classmethod
    def X(cls, ctx: RingCtx) -> "RPoly":
        return cls(ctx, [0, 1])

    @classmethod
    def const(cls, ctx: RingCtx, c) -> "RPoly":
        return cls(ctx, [c])

    @classmethod
    def linear(cls, ctx: RingCtx, root) -> "RPoly":
        """X - root."""
        return cls(ctx, [-ctx(root), 1])

    @classmethod
    def from_roots(cls, ctx: RingCtx, roots) -> "RPoly":
        p = cls(ctx, [1])
        for r in roots:
            p = p * cls.linear(ctx, r)
        return p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k: int) -> RElem:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return self.ctx.zero()

    def _coerce(self, q) -> "RPoly":
        if isinstance(q, RPoly):
            return q
        return RPoly(self.ctx, [q])

    def __add__(self, q):
        q = self._coerce(q)
        n = max(len(self.coeffs), len(q.coeffs))
        return RPoly(self.ctx, [self[k] + q[k] for k in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return RPoly(self.ctx, [-c for c in self.coeffs])

    def __sub__(self, q):
        return self + (-self._coerce(q))

    def __rsub__(self, q):
        return self._coerce(q) - self

    def __mul__(self, q):
        if not isinstance(q, RPoly):
            return self.scale(q)
        if not self.coeffs or not q.coeffs:
            return RPoly(self.ctx, [])
        out = [None] * (len(self.coeffs) + len(q.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(q.coeffs):
                t = a * b
                out[i + j] = t if out[i + j] is None else out[i + j] + t
        return RPoly(self.ctx, [c if c is not None else self.ctx.zero() for c in out])

    def __rmul__(self, c):
        return self.scale(c)

    def __pow__(self, e: int) -> "RPoly":
        r = RPoly(self.ctx, [1])
        for _ in range(e):
            r = r * self
        return r

    def scale(self, c) -> "RPoly":
        c = self.ctx(c)
        return RPoly(self.ctx, [a * c for a in self.coeffs])

    def eval(self, x) -> RElem:
        x = self.ctx(x)
        acc = self.ctx.zero()
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "RPoly":
        return RPoly(self.ctx, [c * k for k, c in enumerate(self.coeffs)][1:])

    def shift_center(self, c) -> "RPoly":
        """The polynomial X -> P(X + c)."""
        lin = RPoly(self.ctx, [c, 1])
        acc = RPoly(self.ctx, [])
        for a in reversed(self.coeffs):
            acc = acc * lin + a
        return acc

    def divmod_linear(self, c) -> tuple["RPoly", RElem]:
        """Synthetic division by (X - c)."""
        c = self.ctx(c)
        if not self.coeffs:
            return RPoly(self.ctx, []), self.ctx.zero()
        q = []
        acc = self.ctx.zero()
        for a in reversed(self.coeffs):
            acc = acc * c + a
            q.append(acc)
        rem = q.pop()
        return RPoly(self.ctx, list(reversed(q))), rem

    def exact_div_linear(self, c) -> "RPoly":
        q, rem = self.divmod_linear(c)
        if not rem.is_zero():
            raise ArithmeticError(f"X - c does not divide the polynomial (remainder v = {r_valuation(rem)})")
        return q

    def min_coeff_valuation(self):
        """Lower bound for the Gauss valuation; zero coefficients count by their bounds."""
        if not self.coeffs:
            return math.inf
        return min(c.valuation_lower_bound() if c.is_zero() else r_valuation(c) for c in self.coeffs)

    def support_degree(self) -> int:
        """Largest index carrying a significant coefficient (-1 for zero)."""
        return self.degree

    def to_json(self) -> list:
        return [c.to_json() for c in self.coeffs]

    @classmethod
    def from_json(cls, ctx: RingCtx, obj: list) -> "RPoly":
        return cls(ctx, [RElem.from_json(ctx, c) for c in obj])

    def __repr__(self):
        return f"RPoly(deg={self.degree})"


def poly_arith(op: str, p: RPoly, q=None):
    if op == "add":
        return p + q
    if op == "mul":
        return p * q
    if op == "scale":
        return p.scale(q)
    if op == "shift_center":
        return p.shift_center(q)
    if op == "eval":
        return p.eval(q)
    if op == "derivative":
        return p.derivative()
    raise ValueError(f"unknown op {op!r}")


# ---------------------------------------------------------------- partial fractions


def _check_centers(centers: Sequence[RElem]) -> None:
    for i in range(len(centers)):
        for j in range(i + 1, len(centers)):
            diff = centers[i] - centers[j]
            if diff.is_zero() or r_valuation(diff) != 0:
                v = diff.valuation_lower_bound() if diff.is_zero() else r_valuation(diff)
                raise CentersCollide(f"v(X_{i + 1} - X_{j + 1}) = {v} > 0")


@dataclass
class PartialFractionTable:
    mode: str
    double_centers: list
    simple_centers: list
    rows: dict  # ell -> row data

    @property
    def n(self) -> int:
        return 2 * len(self.double_centers) + len(self.simple_centers)


def partial_fraction_simple(centers: Sequence[RElem], ell: int) -> list[RElem]:
    """gamma_i with X^ell / prod(X - X_i) = sum gamma_i / (X - X_i)."""
    r = len(centers)
    if not 0 <= ell <= r - 1:
        raise DegreeOutOfRange(f"ell = {ell} outside [0, {r - 1}]")
    _check_centers(centers)
    out = []
    for i, xi in enumerate(centers):
        den = xi.ctx.one
        for j, xj in enumerate(centers):
            if j != i:
                den = den * (xi - xj)
        out.append(xi ** ell / den)
    return out


def partial_fraction_mixed(double_centers: Sequence[RElem], simple_centers: Sequence[RElem], ell: int):
    """(alpha, beta, gamma) with

    X^ell / (Q1^2 Q2) = sum_i alpha_i/(X-X_i)^2 + beta_i/(X-X_i) + sum_j gamma_j/(X-X_j).
    """
    r, s = len(double_centers), len(simple_centers)
    if r < 1:
        raise DegreeOutOfRange("at least one double center is required")
    n = 2 * r + s
    if not 0 <= ell <= n - 1:
        raise DegreeOutOfRange(f"ell = {ell} outside [0, {n - 1}]")
    allc = list(double_centers) + list(simple_centers)
    _check_centers(allc)
    ctx = allc[0].ctx
    X = RPoly.X(ctx)
    num = X ** ell
    dnum = num.derivative()
    alphas, betas = [], []
    for i, xi in enumerate(double_centers):
        den = RPoly(ctx, [1])
        for k, xk in enumerate(double_centers):
            if k != i:
                den = den * RPoly.linear(ctx, xk) ** 2
        for xj in simple_centers:
            den = den * RPoly.linear(ctx, xj)
        N0, N1 = num.eval(xi), dnum.eval(xi)
        D0, D1 = den.eval(xi), den.derivative().eval(xi)
        alphas.append(N0 / D0)
        betas.append((N1 * D0 - N0 * D1) / (D0 * D0))
    gammas = []
    for j, xj in enumerate(simple_centers):
        den = ctx.one
        for xi in double_centers:
            den = den * (xj - xi) ** 2
        for k, xk in enumerate(simple_centers):
            if k != j:
                den = den * (xj - xk)
        gammas.append(xj ** ell / den)
    return alphas, betas, gammas


def simple_table(centers: Sequence[RElem], r: int | None = None) -> PartialFractionTable:
    r = len(centers) if r is None else r
    rows = {ell: partial_fraction_simple(centers, ell) for ell in range(r)}
    return PartialFractionTable("simple", list(centers), [], rows)


def mixed_table(double_centers, simple_centers) -> PartialFractionTable:
    n = 2 * len(double_centers) + len(simple_centers)
    rows = {ell: partial_fraction_mixed(double_centers, simple_centers, ell) for ell in range(n)}
    return PartialFractionTable("mixed", list(double_centers), list(simple_centers), rows)


def _prod_linear(ctx, roots, skip=None, power=1):
    p = RPoly(ctx, [1])
    for k, x in enumerate(roots):
        if k == skip:
            continue
        p = p * RPoly.linear(ctx, x) ** power
    return p


def recombine_simple(centers, gammas, ell: int) -> RPoly:
    """Q * sum gamma_i/(X - X_i) - X^ell (identically zero when exact)."""
    ctx = centers[0].ctx
    acc = RPoly(ctx, [])
    for i, g in enumerate(gammas):
        acc = acc + _prod_linear(ctx, centers, skip=i).scale(g)
    return acc - RPoly.X(ctx) ** ell


def recombine_mixed(double_centers, simple_centers, alphas, betas, gammas, ell: int) -> RPoly:
    """Q1^2 Q2 * (partial fraction sum) - X^ell."""
    ctx = (list(double_centers) + list(simple_centers))[0].ctx
    Q2 = _prod_linear(ctx, simple_centers)
    acc = RPoly(ctx, [])
    for i, xi in enumerate(double_centers):
        rest = _prod_linear(ctx, double_centers, skip=i, power=2) * Q2
        acc = acc + rest.scale(alphas[i]) + (rest * RPoly.linear(ctx, xi)).scale(betas[i])
    Q1sq = _prod_linear(ctx, double_centers, power=2)
    for j, _ in enumerate(simple_centers):
        acc = acc + (Q1sq * _prod_linear(ctx, simple_centers, skip=j)).scale(gammas[j])
    return acc - RPoly.X(ctx) ** ell


def squared_identity_residual_simple(centers, gammas, ell: int) -> RPoly:
    """X^(2 ell) - Q^2 sum gamma_i^2 / (X - X_i)^2; lies in 2R[X] with degree <= 2r - 1."""
    ctx = centers[0].ctx
    acc = RPoly(ctx, [])
    for i, g in enumerate(gammas):
        acc = acc + _prod_linear(ctx, centers, skip=i, power=2).scale(g * g)
    return RPoly.X(ctx) ** (2 * ell) - acc


def squared_identity_residual_mixed(double_centers, simple_centers, alphas, betas, gammas, ell: int) -> RPoly:
    """X^(2 ell) - Q1^4 Q2^2 (sum alpha^2/(X-X_i)^4 + beta^2/(X-X_i)^2 + sum gamma^2/(X-X_j)^2)."""
    ctx = (list(double_centers) + list(simple_centers))[0].ctx
    Q2sq = _prod_linear(ctx, simple_centers, power=2)
    Q1_4 = _prod_linear(ctx, double_centers, power=4)
    acc = RPoly(ctx, [])
    for i, xi in enumerate(double_centers):
        rest = _prod_linear(ctx, double_centers, skip=i, power=4) * Q2sq
        lin2 = RPoly.linear(ctx, xi) ** 2
        acc = acc + rest.scale(alphas[i] * alphas[i]) + (rest * lin2).scale(betas[i] * betas[i])
    for j, _ in enumerate(simple_centers):
        acc = acc + (Q1_4 * _prod_linear(ctx, simple_centers, skip=j, power=2)).scale(gammas[j] * gammas[j])
    return RPoly.X(ctx) ** (2 * ell) - acc


# ---------------------------------------------------------------- Newton polygons


@dataclass
class NewtonPolygon:
    vertices: list  # (exponent, valuation) on the lower hull, left to right
    segments: list  # (slope, horizontal length)
    zero_roots: int  # multiplicity of X = 0 (coefficients below precision at the bottom)

    def root_valuations(self) -> list:
        out = [math.inf] * self.zero_roots
        for slope, length in self.segments:
            out.extend([-slope] * length)
        return sorted(out)

    def slope_multiset(self) -> dict:
        ms: dict = {}
        for slope, length in self.segments:
            ms[-slope] = ms.get(-slope, 0) + length
        if self.zero_roots:
            ms[math.inf] = self.zero_roots
        return ms


def _cross(o, a, b) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def newton_polygon(P: RPoly) -> NewtonPolygon:
    if not P.coeffs:
        raise PrecisionExhausted("Newton polygon of the zero polynomial")
    pts = [(k, r_valuation(c)) for k, c in enumerate(P.coeffs) if not c.is_zero()]
    low = pts[0][0]
    hull: list = []
    for p in pts:
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], p) <= 0:
            hull.pop()
        hull.append(p)
    segs = []
    for a, b in zip(hull, hull[1:]):
        segs.append((Fraction(b[1] - a[1]) / (b[0] - a[0]), b[0] - a[0]))
    # coefficients below precision must sit on or above the hull
    for k, c in enumerate(P.coeffs):
        if not c.is_zero() or k < low:
            continue
        for a, b in zip(hull, hull[1:]):
            if a[0] <= k <= b[0]:
                line = a[1] + (b[1] - a[1]) * Fraction(k - a[0], b[0] - a[0])
                if c.valuation_lower_bound() < line:
                    raise PrecisionExhausted(f"coefficient {k} is below precision under the hull")
    return NewtonPolygon(hull, segs, low)
