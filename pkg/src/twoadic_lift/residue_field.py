"""Arithmetic in the finite fields F_{2^d}.

Elements are stored as integers whose bit ``i`` is the coordinate on
``g^i`` in the power basis, ``g`` being a root of the context modulus.
The modulus for each degree is the irreducible polynomial of that degree
with the smallest integer encoding, so contexts (and anything serialized
from them) are reproducible.
"""
from __future__ import annotations

import functools
from math import gcd
from dataclasses import dataclass
from typing import Callable, Iterator


class FieldError(ArithmeticError):
    pass


class CtxMismatch(FieldError):
    pass


class NoSolution(FieldError):
    """An Artin-Schreier equation s^2 + s = a with Tr(a) = 1."""

    def __init__(self, a: "FFElem"):
        super().__init__(f"s^2 + s = {a.bits()} has no solution in F_2^{a.ctx.d} (trace 1)")
        self.a = a
        self.trace = 1


def clmul(a: int, b: int) -> int:
    """Carry-less product of two bit polynomials."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def polymod(a: int, m: int) -> int:
    dm = m.bit_length() - 1
    while a.bit_length() - 1 >= dm:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


def polygcd(a: int, b: int) -> int:
    while b:
        a, b = b, polymod(a, b)
    return a


def is_irreducible(f: int) -> bool:
    """Rabin-style test: f of degree d is irreducible iff gcd(x^(2^i) - x, f) = 1 for i <= d/2."""
    d = f.bit_length() - 1
    if d < 1:
        return False
    if d == 1:
        return True
    if not f & 1:
        return False
    x = 0b10
    t = x
    for _ in range(d // 2):
        t = polymod(clmul(t, t), f)
        if polygcd(f, t ^ x) != 1:
            return False
    return True


@functools.lru_cache(maxsize=None)
def least_irreducible(d: int) -> int:
    for f in range(1 << d, 1 << (d + 1)):
        if is_irreducible(f):
            return f
    raise AssertionError("unreachable")  # pragma: no cover


@dataclass(frozen=True)
class FieldCtx:
    d: int
    modulus: int

    def __post_init__(self):
        if self.d < 1 or self.modulus.bit_length() - 1 != self.d:
            raise ValueError("modulus degree must equal d >= 1")
        if not is_irreducible(self.modulus):
            raise ValueError(f"modulus {self.modulus:b} is reducible")

    @property
    def order(self) -> int:
        return 1 << self.d

    def __call__(self, value) -> "FFElem":
        if isinstance(value, FFElem):
            if value.ctx != self:
                raise CtxMismatch("element belongs to another field")
            return value
        if isinstance(value, str):
            return self.from_bits(value)
        return FFElem(self, int(value) & (self.order - 1) if int(value) >= 0 else _bad(value))

    def from_bits(self, s: str) -> "FFElem":
        """Parse a bit string, least-significant coordinate first ("01" is g)."""
        s = s.strip()
        if not s or set(s) - {"0", "1"} or len(s) > self.d:
            raise ValueError(f"bad field element string {s!r} for d={self.d}")
        return FFElem(self, int(s[::-1], 2))

    @property
    def zero(self) -> "FFElem":
        return FFElem(self, 0)

    @property
    def one(self) -> "FFElem":
        return FFElem(self, 1)

    @property
    def gen(self) -> "FFElem":
        return FFElem(self, 0b10 if self.d > 1 else 1)

    def elements(self) -> Iterator["FFElem"]:
        for v in range(self.order):
            yield FFElem(self, v)

    def modulus_bits(self) -> str:
        return format(self.modulus, "b")[::-1]

    def to_json(self) -> dict:
        return {"d": self.d, "modulus": self.modulus_bits()}


def _bad(value):
    raise ValueError(f"cannot coerce {value!r} into a field element")


@functools.lru_cache(maxsize=None)
def field(d: int) -> FieldCtx:
    """The canonical context for F_{2^d}."""
    return FieldCtx(d, least_irreducible(d))


@dataclass(frozen=True)
class FFElem:
    ctx: FieldCtx
    value: int

    def _other(self, y) -> "FFElem":
        if isinstance(y, FFElem):
            if y.ctx != self.ctx:
                raise CtxMismatch(f"F_2^{self.ctx.d} vs F_2^{y.ctx.d}")
            return y
        return self.ctx(y)

    def __add__(self, y):
        return FFElem(self.ctx, self.value ^ self._other(y).value)

    __radd__ = __add__
    __sub__ = __add__
    __rsub__ = __add__

    def __neg__(self):
        return self

    def __mul__(self, y):
        y = self._other(y)
        return FFElem(self.ctx, polymod(clmul(self.value, y.value), self.ctx.modulus))

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "FFElem":
        if e < 0:
            return self.inverse() ** (-e)
        r, b = self.ctx.one, self
        while e:
            if e & 1:
                r = r * b
            b = b * b
            e >>= 1
        return r

    def inverse(self) -> "FFElem":
        if not self.value:
            raise ZeroDivisionError("inverse of 0 in F_2^d")
        return self ** (self.ctx.order - 2)

    def __truediv__(self, y):
        return self * self._other(y).inverse()

    def __bool__(self):
        return self.value != 0

    def sqrt(self) -> "FFElem":
        return ff_sqrt(self)

    def trace(self) -> int:
        t, x = self, self
        for _ in range(self.ctx.d - 1):
            x = x * x
            t = t + x
        assert t.value in (0, 1)
        return t.value

    def bits(self) -> str:
        return format(self.value, f"0{self.ctx.d}b")[::-1]

    def __repr__(self):
        return f"FFElem({self.bits()})"


def ff_arith(op: str, x: FFElem, y=None) -> FFElem:
    """Dispatch helper: op in {add, mul, inv, pow}."""
    if op == "add":
        return x + y
    if op == "mul":
        return x * y
    if op == "inv":
        return x.inverse()
    if op == "pow":
        return x ** int(y)
    raise ValueError(f"unknown op {op!r}")


def ff_sqrt(x: FFElem) -> FFElem:
    # inverse Frobenius
    for _ in range(x.ctx.d - 1):
        x = x * x
    return x


@functools.lru_cache(maxsize=None)
def _as_basis(ctx: FieldCtx):
    """Row-reduced data for the F_2-linear map s -> s^2 + s."""
    cols = []
    for i in range(ctx.d):
        b = FFElem(ctx, 1 << i)
        cols.append((b * b + b).value)
    return tuple(cols)


def ff_artin_schreier(a: FFElem) -> FFElem:
    """Return s with s^2 + s = a; among {s, s+1} the one with coordinate 0 clear.

    Raises NoSolution when Tr(a) = 1.
    """
    ctx = a.ctx
    if a.trace():
        raise NoSolution(a)
    # Gaussian elimination over F_2: columns L(g^i), unknown bits of s.
    cols = list(_as_basis(ctx))
    # each row: (image bitmask, preimage bitmask)
    pivots: dict[int, tuple[int, int]] = {}
    for i, c in enumerate(cols):
        img, pre = c, 1 << i
        while img:
            top = img.bit_length() - 1
            if top in pivots:
                pimg, ppre = pivots[top]
                img ^= pimg
                pre ^= ppre
            else:
                pivots[top] = (img, pre)
                break
    target, sol = a.value, 0
    while target:
        top = target.bit_length() - 1
        if top not in pivots:  # pragma: no cover - excluded by the trace test
            raise NoSolution(a)
        pimg, ppre = pivots[top]
        target ^= pimg
        sol ^= ppre
    if sol & 1:
        sol ^= 1
    s = FFElem(ctx, sol)
    assert s * s + s == a
    return s


def ff_nth_root(x: FFElem, n: int) -> FFElem | None:
    """The smallest (as an integer) n-th root of x, or None if x is not an n-th power."""
    if not x:
        return x
    q1 = x.ctx.order - 1
    g = gcd(n, q1)
    if g == 1:
        return x ** pow(n, -1, q1)
    if x ** (q1 // g) != x.ctx.one:
        return None
    roots = poly_roots([x] + [x.ctx.zero] * (n - 1) + [x.ctx.one])
    return min(roots, key=lambda r: r.value)


# polynomials over F_{2^d}: coefficient lists, lowest degree first


def _ptrim(p: list) -> list:
    while p and not p[-1]:
        p.pop()
    return p


def _pmod(a: list, m: list) -> list:
    a = list(a)
    inv = m[-1].inverse()
    dm = len(m) - 1
    while len(_ptrim(a)) - 1 >= dm:
        c = a[-1] * inv
        off = len(a) - 1 - dm
        for i, mi in enumerate(m):
            a[off + i] = a[off + i] + c * mi
    return a


def _pmulmod(a: list, b: list, m: list, zero: FFElem) -> list:
    out = [zero] * max(len(a) + len(b) - 1, 0)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = out[i + j] + x * y
    return _pmod(out, m)


def _monic(a: list) -> list:
    inv = a[-1].inverse()
    return [c * inv for c in a]


def _pgcd(a: list, b: list) -> list:
    a, b = _ptrim(list(a)), _ptrim(list(b))
    while b:
        a, b = b, _ptrim(_pmod(a, b))
    return _monic(a)


def _pdivexact(a: list, b: list) -> list:
    a = list(a)
    inv = b[-1].inverse()
    db = len(b) - 1
    q = [a[0].ctx.zero] * (len(a) - db)
    for k in range(len(a) - 1 - db, -1, -1):
        c = a[k + db] * inv
        q[k] = c
        for i, bi in enumerate(b):
            a[k + i] = a[k + i] + c * bi
    return q


def poly_roots(coeffs: list) -> list:
    """All distinct roots in F_{2^d} of a polynomial with F_{2^d} coefficients.

    Uses gcd with y^q - y followed by trace splitting, so the cost is
    polynomial in d.
    """
    f = _ptrim([c for c in coeffs])
    if len(f) < 2:
        return []
    ctx = f[0].ctx
    zero, one = ctx.zero, ctx.one
    # y^q mod f by d squarings of y
    t = _pmod([zero, one], f)
    for _ in range(ctx.d):
        t = _pmulmod(t, t, f, zero)
    t = t + [zero] * max(0, 2 - len(t))
    t[1] = t[1] + one
    t = _ptrim(t)
    g = _monic(f) if not t else _pgcd(f, t)
    out: list = []
    stack = [g]
    beta = 1
    while stack:
        h = stack.pop()
        if len(h) == 2:
            out.append(h[0] / h[1])
            continue
        if len(h) < 2:
            continue
        while True:
            b = FFElem(ctx, beta % ctx.order or 1)
            beta += 1
            # Tr(b y) mod h
            term = _pmod([zero, b], h)
            acc = list(term)
            for _ in range(ctx.d - 1):
                term = _pmulmod(term, term, h, zero)
                acc = [x + y for x, y in zip(acc + [zero] * (len(term) - len(acc)),
                                             term + [zero] * (len(acc) - len(term)))]
            acc = _ptrim(acc)
            if not acc:
                continue
            k = _pgcd(h, acc)
            if 1 < len(k) < len(h):
                stack.append(k)
                stack.append(_monic(_pdivexact(h, k)))
                break
    return sorted(out, key=lambda r: r.value)


@functools.lru_cache(maxsize=None)
def ff_extend(ctx: FieldCtx, factor: int = 2) -> tuple[FieldCtx, Callable[[FFElem], FFElem]]:
    """Embed F_{2^d} into F_{2^{factor*d}} (factor 2 is the default doubling).

    The old generator goes to the smallest root (as an integer) of the old
    modulus in the bigger field.
    """
    big = field(ctx.d * factor)
    roots = poly_roots([FFElem(big, (ctx.modulus >> i) & 1) for i in range(ctx.d + 1)])
    assert len(roots) == ctx.d
    root = roots[0]
    powers = [root ** i for i in range(ctx.d)]

    def embed(x: FFElem) -> FFElem:
        if x.ctx != ctx:
            raise CtxMismatch("embedding applied to a foreign element")
        acc = big.zero
        for i in range(ctx.d):
            if (x.value >> i) & 1:
                acc = acc + powers[i]
        return acc

    return big, embed


def f2_rank(vectors: list[int]) -> int:
    """Rank over F_2 of integer-encoded bit vectors."""
    basis: dict[int, int] = {}
    rank = 0
    for v in vectors:
        while v:
            top = v.bit_length() - 1
            if top in basis:
                v ^= basis[top]
            else:
                basis[top] = v
                rank += 1
                break
    return rank
