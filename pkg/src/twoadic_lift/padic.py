"""Finite-precision arithmetic in R = W(F_{2^d})[pi], pi^M = 2.

An element is stored as ``pi^val * sum_{i<M} c_i pi^i`` where each ``c_i``
lives in the Galois ring GR(2^P, d) = (Z/2^P)[x] / (lifted modulus).  The
array ``unit`` has shape (M, d); row ``i`` holds the coordinates of ``c_i``.
Since R is free over W with basis 1, pi, ..., pi^(M-1) this representation
is unique once the unit part is normalized (c_0 invertible).

Precision is capped-relative: every nonzero element carries ``rp`` digits of
relative precision, so it is known modulo pi^(val + rp).  An element with no
significant digit is a zero carrying only a lower bound ``val`` on its
valuation.  Valuations are reported in units where v(2) = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .residue_field import FFElem, FieldCtx, NoSolution, ff_artin_schreier, ff_nth_root, ff_sqrt


class PadicError(ArithmeticError):
    pass


class PrecisionExhausted(PadicError):
    pass


class DivisionByNearZero(PadicError, ZeroDivisionError):
    pass


class ExponentNotRepresentable(PadicError):
    pass


class NeedsFieldExtension(PadicError):
    """A residue-level Artin-Schreier equation had no solution in F_{2^d}."""


class ResidueRootMissing(PadicError):
    def __init__(self, msg: str, gcd: int):
        super().__init__(msg)
        self.gcd = gcd


class OddValuation(PadicError):
    pass


class NotASquare(PadicError):
    """Square-class obstruction at an odd level below 2 (a ramified one)."""


class NegativeValuation(PadicError):
    pass


class CtxMismatchR(PadicError):
    pass


@dataclass(frozen=True)
class RingCtx:
    field: FieldCtx
    M: int
    N: int = 0
    lift: tuple = dc_field(init=False, repr=False, compare=False)
    P: int = dc_field(init=False, repr=False, compare=False)
    dtype: object = dc_field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be positive")
        if self.N <= 0:
            object.__setattr__(self, "N", 6 * self.M)
        P = -(-self.N // self.M) + 1
        object.__setattr__(self, "P", P)
        lift = tuple((self.field.modulus >> i) & 1 for i in range(self.field.d + 1))
        object.__setattr__(self, "lift", lift)
        # convolution sums stay below M * (2d-1) * 4^P
        wide = 2 * P + (self.M * (2 * self.d - 1)).bit_length() + 2 > 62
        object.__setattr__(self, "dtype", object if wide else np.int64)

    @classmethod
    def make(cls, field: FieldCtx, M: int, precision_factor: int = 1) -> "RingCtx":
        return cls(field, M, 6 * M * precision_factor)

    @property
    def d(self) -> int:
        return self.field.d

    @property
    def mod(self) -> int:
        return 1 << self.P

    def __call__(self, x) -> "RElem":
        if isinstance(x, RElem):
            if x.ctx != self:
                raise CtxMismatchR("element from another ring")
            return x
        if isinstance(x, FFElem):
            return teichmuller(self, x)
        if isinstance(x, (int, np.integer)):
            return RElem.from_int(self, int(x))
        if isinstance(x, Fraction):
            return RElem.from_int(self, x.numerator) / RElem.from_int(self, x.denominator)
        raise TypeError(f"cannot coerce {type(x).__name__} into R")

    def zero(self, absprec: int | None = None) -> "RElem":
        return RElem(self, self.N if absprec is None else absprec, 0, None)

    @property
    def one(self) -> "RElem":
        return RElem.from_int(self, 1)

    @property
    def pi(self) -> "RElem":
        return RElem(self, 1, self.N, self._unit_row0([1]))

    def _unit_row0(self, coeffs) -> np.ndarray:
        a = np.zeros((self.M, self.d), dtype=self.dtype)
        for j, c in enumerate(coeffs):
            a[0, j] = c % self.mod
        return a

    def row_moduli(self, rp: int) -> np.ndarray:
        exps = [max(0, -(-(rp - i) // self.M)) for i in range(self.M)]
        return np.array([1 << e for e in exps], dtype=self.dtype)[:, None]

    def to_json(self) -> dict:
        return {"field": self.field.to_json(), "M": self.M, "N_abs": self.N}


# ---------------------------------------------------------------- array kernels


def _v2(x: int) -> int:
    return (x & -x).bit_length() - 1


def _array_level(ctx: RingCtx, a: np.ndarray) -> float:
    """min_i (M * v2(c_i) + i); inf for the zero array."""
    if a.dtype == object:
        best = math.inf
        for i in range(ctx.M):
            for c in a[i]:
                c = int(c)
                if c:
                    best = min(best, ctx.M * _v2(c) + i)
        return best
    low = a & (-a)
    nz = low > 0
    if not nz.any():
        return math.inf
    tz = np.where(nz, np.log2(np.where(nz, low, 1)), 10**6).astype(np.int64)
    rows = tz.min(axis=1) * ctx.M + np.arange(ctx.M)
    return int(rows.min())


def _div_pi(ctx: RingCtx, a: np.ndarray, s: int) -> np.ndarray:
    q, r = divmod(s, ctx.M)
    if q:
        a = a >> q
    if r:
        a = np.concatenate([a[r:], a[:r] >> 1])
    return a


def _mul_pi(ctx: RingCtx, a: np.ndarray, s: int) -> np.ndarray:
    q, r = divmod(s, ctx.M)
    if q:
        a = a << q
    if r:
        a = np.concatenate([a[ctx.M - r:] << 1, a[: ctx.M - r]])
    return a % ctx.mod


def _mul_arrays(ctx: RingCtx, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    M, d, mod = ctx.M, ctx.d, ctx.mod
    W = 2 * d - 1
    if d == 1:
        fa, fb = a[:, 0], b[:, 0]
    else:
        A = np.zeros((M, W), dtype=ctx.dtype)
        B = np.zeros((M, W), dtype=ctx.dtype)
        A[:, :d] = a
        B[:, :d] = b
        fa, fb = A.ravel(), B.ravel()
    c = np.convolve(fa, fb)
    c = np.concatenate([c, np.zeros(2 * M * W - len(c), dtype=ctx.dtype)]) % mod
    C = c.reshape(2 * M, W)
    low = np.array(ctx.lift[:d], dtype=ctx.dtype)
    for j in range(W - 1, d - 1, -1):
        col = C[:, j].copy()
        C[:, j] = 0
        C[:, j - d : j] = (C[:, j - d : j] - col[:, None] * low[None, :]) % mod
    out = (C[:M, :d] + 2 * C[M:, :d]) % mod
    return out


# ---------------------------------------------------------------- Galois ring helpers


def _gr_mul(x: tuple, y: tuple, lift: tuple, mod: int) -> tuple:
    d = len(x)
    prod = [0] * (2 * d - 1)
    for i, a in enumerate(x):
        if a:
            for j, b in enumerate(y):
                prod[i + j] += a * b
    for k in range(2 * d - 2, d - 1, -1):
        c = prod[k]
        if c:
            prod[k] = 0
            for i in range(d):
                prod[k - d + i] -= c * lift[i]
    return tuple(v % mod for v in prod[:d])


@lru_cache(maxsize=None)
def _teich_coeffs(lift: tuple, P: int, value: int) -> tuple:
    d = len(lift) - 1
    mod = 1 << P
    t = tuple((value >> i) & 1 for i in range(d))
    if not any(t):
        return t
    for _ in range(P + 1):
        for _ in range(d):
            t = _gr_mul(t, t, lift, mod)
    return t


# ---------------------------------------------------------------- elements


class RElem:
    __slots__ = ("ctx", "val", "rp", "unit")

    def __init__(self, ctx: RingCtx, val: int, rp: int, unit):
        self.ctx = ctx
        self.val = val
        self.rp = rp
        self.unit = unit

    # construction -------------------------------------------------------------

    @staticmethod
    def _make(ctx: RingCtx, val: int, arr: np.ndarray, rp: int) -> "RElem":
        rp = min(rp, ctx.N)
        if rp <= 0:
            return RElem(ctx, val + max(rp, 0), 0, None)
        arr = arr % ctx.mod
        k = _array_level(ctx, arr)
        if k >= rp:
            return RElem(ctx, val + rp, 0, None)
        if k:
            arr = _div_pi(ctx, arr, k)
        rp -= k
        arr = arr % ctx.row_moduli(rp)
        return RElem(ctx, val + k, rp, arr)

    @classmethod
    def from_int(cls, ctx: RingCtx, n: int) -> "RElem":
        if n == 0:
            return ctx.zero()
        k = _v2(abs(n))
        return cls._make(ctx, ctx.M * k, ctx._unit_row0([n >> k]), ctx.N)

    @classmethod
    def from_digits(cls, ctx: RingCtx, shift: int, digits, rp: int | None = None) -> "RElem":
        """Build pi^shift * sum_i c_i pi^i from at most M rows of GR coordinates."""
        if len(digits) > ctx.M:
            raise ValueError("more digit rows than the ramification index")
        arr = np.zeros((ctx.M, ctx.d), dtype=ctx.dtype)
        for i, c in enumerate(digits):
            row = [int(v) % ctx.mod for v in c]
            arr[i, : len(row)] = row
        return cls._make(ctx, shift, arr, ctx.N if rp is None else rp)

    # basic properties ---------------------------------------------------------

    def is_zero(self) -> bool:
        return self.unit is None

    @property
    def absprec(self) -> int:
        return self.val + self.rp

    def valuation(self):
        return r_valuation(self)

    def valuation_lower_bound(self) -> Fraction:
        return Fraction(self.val, self.ctx.M)

    def residue(self) -> FFElem:
        return r_reduce(self)

    def _coerce(self, y) -> "RElem":
        if isinstance(y, RElem):
            if y.ctx != self.ctx:
                raise CtxMismatchR("ring contexts differ")
            return y
        return self.ctx(y)

    # arithmetic ---------------------------------------------------------------

    def __add__(self, y):
        y = self._coerce(y)
        x = self
        ctx = x.ctx
        ab = min(x.absprec, y.absprec)
        if x.unit is None and y.unit is None:
            return ctx.zero(ab)
        if x.unit is None:
            x, y = y, x
        if y.unit is None:
            if ab <= x.val:
                return ctx.zero(ab)
            return RElem(ctx, x.val, ab - x.val, x.unit % ctx.row_moduli(ab - x.val))
        a = min(x.val, y.val)
        ux = x.unit if x.val == a else _mul_pi(ctx, x.unit, x.val - a)
        uy = y.unit if y.val == a else _mul_pi(ctx, y.unit, y.val - a)
        return RElem._make(ctx, a, ux + uy, ab - a)

    __radd__ = __add__

    def __neg__(self):
        if self.unit is None:
            return self
        return RElem(self.ctx, self.val, self.rp, (-self.unit) % self.ctx.row_moduli(self.rp))

    def __sub__(self, y):
        return self + (-self._coerce(y))

    def __rsub__(self, y):
        return self._coerce(y) + (-self)

    def __mul__(self, y):
        y = self._coerce(y)
        x = self
        ctx = x.ctx
        if x.unit is None or y.unit is None:
            if x.unit is None and y.unit is None:
                return ctx.zero(x.val + y.val)
            z, nz = (x, y) if x.unit is None else (y, x)
            return ctx.zero(z.val + nz.val)
        return RElem._make(ctx, x.val + y.val, _mul_arrays(ctx, x.unit, y.unit), min(x.rp, y.rp))

    __rmul__ = __mul__

    def inverse(self) -> "RElem":
        if self.unit is None:
            raise DivisionByNearZero("inverse of an element below precision")
        ctx = self.ctx
        u = RElem(ctx, 0, self.rp, self.unit)
        y = teichmuller(ctx, r_reduce(u).inverse())
        for _ in range(2 * ctx.N.bit_length() + 4):
            e = 1 - u * y
            if e.is_zero():
                break
            y = y + y * e
        else:  # pragma: no cover
            raise PrecisionExhausted("inverse did not converge")
        y = RElem(ctx, -self.val, self.rp, y.unit % ctx.row_moduli(self.rp))
        return y

    def __truediv__(self, y):
        return self * self._coerce(y).inverse()

    def __rtruediv__(self, y):
        return self._coerce(y) * self.inverse()

    def __pow__(self, e: int) -> "RElem":
        if e < 0:
            return self.inverse() ** (-e)
        r, b = self.ctx.one, self
        while e:
            if e & 1:
                r = r * b
            e >>= 1
            if e:
                b = b * b
        return r

    def shift(self, s: int) -> "RElem":
        """Multiply by pi^s."""
        return RElem(self.ctx, self.val + s, self.rp, self.unit)

    def with_relprec(self, rp: int) -> "RElem":
        if self.unit is None or rp >= self.rp:
            return self
        if rp <= 0:
            return self.ctx.zero(self.val + max(rp, 0))
        return RElem(self.ctx, self.val, rp, self.unit % self.ctx.row_moduli(rp))

    def close_to(self, y, threshold: Fraction) -> bool:
        """True iff v(self - y) >= threshold (a zero difference counts by its bound)."""
        return (self - y).valuation_lower_bound() >= threshold

    def leading_residue(self) -> FFElem:
        """Residue of self / pi^val (the leading digit)."""
        if self.unit is None:
            raise PrecisionExhausted("no significant digit")
        bits = 0
        for j in range(self.ctx.d):
            if int(self.unit[0, j]) & 1:
                bits |= 1 << j
        return FFElem(self.ctx.field, bits)

    # serialization --------------------------------------------------------------

    def to_json(self) -> dict:
        if self.unit is None:
            return {"shift": self.val, "relprec": 0, "digits": []}
        rows = [[str(int(v)) for v in row] for row in self.unit]
        while rows and all(v == "0" for v in rows[-1]):
            rows.pop()
        return {"shift": self.val, "relprec": self.rp, "digits": rows}

    @classmethod
    def from_json(cls, ctx: RingCtx, obj: dict) -> "RElem":
        if not obj["digits"]:
            return ctx.zero(int(obj["shift"]))
        return cls.from_digits(ctx, int(obj["shift"]), obj["digits"], int(obj["relprec"]))

    def __repr__(self):
        if self.unit is None:
            return f"RElem(O(pi^{self.val}))"
        return f"RElem(v={Fraction(self.val, self.ctx.M)}, rp={self.rp}, c0={[int(v) for v in self.unit[0]]})"


# ---------------------------------------------------------------- module-level API


def r_arith(op: str, x: RElem, y: RElem | None = None) -> RElem:
    if op == "add":
        return x + y
    if op == "mul":
        return x * y
    if op == "neg":
        return -x
    if op == "inv":
        return x.inverse()
    if op == "div":
        return x / y
    if op == "sub":
        return x - y
    raise ValueError(f"unknown op {op!r}")


def r_valuation(x: RElem):
    """Exact valuation as a Fraction, or math.inf when below precision."""
    if x.unit is None:
        return math.inf
    return Fraction(x.val, x.ctx.M)


def r_reduce(x: RElem) -> FFElem:
    if x.unit is None:
        if x.val <= 0:
            raise PrecisionExhausted("reduction of an element with no digit at level 0")
        return x.ctx.field.zero
    if x.val < 0:
        raise NegativeValuation(f"v = {Fraction(x.val, x.ctx.M)} < 0")
    if x.val > 0:
        return x.ctx.field.zero
    return x.leading_residue()


def teichmuller(ctx: RingCtx, t: FFElem) -> RElem:
    if t.ctx != ctx.field:
        raise CtxMismatchR("residue element from another field")
    if not t:
        return ctx.zero()
    coeffs = _teich_coeffs(ctx.lift, ctx.P, t.value)
    return RElem(ctx, 0, ctx.N, ctx._unit_row0(coeffs) % ctx.row_moduli(ctx.N))


def two_power(ctx: RingCtx, e) -> RElem:
    e = Fraction(e)
    k = e * ctx.M
    if k.denominator != 1:
        raise ExponentNotRepresentable(f"2^{e} needs M divisible by {e.denominator}, M = {ctx.M}")
    return RElem(ctx, int(k), ctx.N, ctx._unit_row0([1]))


def _exact(x: RElem) -> RElem:
    if x.unit is None:
        return x
    return RElem(x.ctx, x.val, x.ctx.N, x.unit)


def r_sqrt(u: RElem, prec: int | None = None) -> RElem:
    """Square root of u.

    With ``prec=None`` the root is computed to the full precision that u
    allows (one pi^M of relative precision is spent).  With an integer
    ``prec`` the function returns a chosen element w with
    v(w^2 - u) >= prec / M, treated as exact; this form exists for units
    that are squares only up to some level.
    """
    ctx = u.ctx
    M = ctx.M
    if u.unit is None:
        raise PrecisionExhausted("square root of an element below precision")
    if u.val % 2:
        raise OddValuation(f"v = {Fraction(u.val, M)} is an odd multiple of 1/{M}")
    half = u.val // 2
    unit = RElem(ctx, 0, u.rp, u.unit)
    target = unit.rp if prec is None else min(prec - u.val, unit.rp)
    w = teichmuller(ctx, ff_sqrt(unit.leading_residue()))
    guard = 0
    while True:
        guard += 1
        if guard > 4 * ctx.N + 16:  # pragma: no cover
            raise PrecisionExhausted("square root did not converge")
        e = unit - w * w
        if e.unit is None or e.val >= target:
            break
        k = e.val
        if k < 2 * M:
            if k % 2:
                raise NotASquare(f"deviation at odd level {k}/{M} below 2")
            c = teichmuller(ctx, ff_sqrt(e.leading_residue()))
            w = w + c.shift(k // 2)
        elif k == 2 * M:
            lead = e.leading_residue() / (w.leading_residue() ** 2)
            try:
                z = ff_artin_schreier(lead)
            except NoSolution as exc:
                raise NeedsFieldExtension(str(exc)) from exc
            w = w + 2 * w * teichmuller(ctx, z)
        else:
            w = w + e / (2 * w)
        # w is a chosen approximation: regard it as exact
        w = _exact(w)
    if prec is None:
        w = w.with_relprec(unit.rp - M)
    return w.shift(half)


def r_root(u: RElem, n: int, prec: int | None = None) -> RElem:
    """n-th root for odd n by Hensel lifting from a residue root."""
    if n < 1 or n % 2 == 0:
        raise ValueError("r_root needs an odd positive n")
    ctx = u.ctx
    if u.unit is None:
        raise PrecisionExhausted("root of an element below precision")
    if u.val % n:
        raise ExponentNotRepresentable(f"valuation {u.val}/{ctx.M} not divisible by {n}")
    if n == 1:
        return u
    unit = RElem(ctx, 0, u.rp, u.unit)
    r = ff_nth_root(unit.leading_residue(), n)
    if r is None:
        g = math.gcd(n, ctx.field.order - 1)
        raise ResidueRootMissing(
            f"residue has no {n}-th root in F_2^{ctx.d} (gcd({n}, 2^{ctx.d}-1) = {g})", g
        )
    y = teichmuller(ctx, r)
    target = unit.rp if prec is None else min(prec - u.val, unit.rp)
    for _ in range(2 * ctx.N.bit_length() + 4):
        e = y ** n - unit
        if e.unit is None or e.val >= target:
            break
        y = _exact(y - e / (n * y ** (n - 1)))
    else:  # pragma: no cover
        raise PrecisionExhausted("root iteration did not converge")
    return y.shift(u.val // n)
