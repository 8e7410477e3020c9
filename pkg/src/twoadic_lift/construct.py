"""Explicit lifting covers Y^2 = f(X) for (Z/2)^2 and (Z/2)^3 actions.

Each cover is assembled from explicitly factored pieces so that its branch
points are known exactly; ``verify`` re-derives every claimed property from
the expanded polynomials.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .as_input import ASEquation, ConductorType, validate_type
from .padic import (
    RElem,
    RingCtx,
    r_root,
    r_sqrt,
    r_valuation,
    teichmuller,
    two_power,
)
from .poly import RPoly, mixed_table, simple_table
from .residue_field import FieldCtx, ff_sqrt


class ConstructionError(ArithmeticError):
    pass


class PreconditionViolated(ConstructionError):
    pass


class ResidueFieldTooSmall(ConstructionError):
    pass


class UnexpectedNegativeValuation(ConstructionError):
    pass


class MinValuationViolated(ConstructionError):
    pass


class ValuationCheckFailed(ConstructionError):
    pass


class DistinctnessUnresolvable(ConstructionError):
    pass


F = Fraction


# ---------------------------------------------------------------- parameters


@dataclass(frozen=True)
class ThicknessSolution:
    m: int
    eps0: Fraction
    eps1: Fraction
    eps12: Fraction
    eps23: Fraction
    eps1_sat: Fraction
    eps23_sat: Fraction
    rho_exps: tuple
    mt: tuple = ()

    def identities(self) -> dict:
        """Per-point metric constraints and path identities, each as a bool."""
        m1, m2, m3 = self.mt
        e0, e1, e12, e23 = self.eps0, self.eps1, self.eps12, self.eps23
        v1, v2, v3 = self.rho_exps
        return {
            "cover1_group": m1 * e0 + 3 * e1 + 3 * e12 + e23 == 2,
            "cover2_group": m2 * e0 + 3 * e1 + e12 + e23 == 2,
            "cover3_group": m3 * e0 + 3 * e1 + e12 == 2,
            "cover2_satellite": m2 * e0 + self.eps1_sat + self.eps23_sat == 2,
            "cover3_satellite": m3 * e0 + self.eps1_sat == 2,
            "path_rho1": e1 == v1,
            "path_rho2": e1 + e12 == v2,
            "path_rho3": e1 + e12 + e23 == v3,
            "satellite_depth_rho2": self.eps1_sat == 1 + v2,
            "satellite_depth_rho3": self.eps1_sat + self.eps23_sat == 1 + v3,
        }

    def report(self) -> dict:
        v1, v2, v3 = self.rho_exps
        along_x2 = 1 + v3 - self.eps0
        return {
            "m": self.m,
            "eps0": str(self.eps0),
            "eps1": str(self.eps1),
            "eps12": str(self.eps12),
            "eps23": str(self.eps23),
            "eps1_tilde": str(self.eps1_sat),
            "eps23_tilde": str(self.eps23_sat),
            "rho_exponents": [str(v1), str(v2), str(v3)],
            "identities": {k: ("pass" if ok else "fail") for k, ok in self.identities().items()},
            "eps1_tilde_comparison": {
                "closed_form": str(self.eps1_sat),
                "depth_of_cover3_satellite_branch": str(1 + v2),
                "depth_of_cover2_satellite_pair": str(1 + v3),
                "v(rho1^2 rho3) - eps0": str(along_x2),
                "closed_form_minus_that": str(self.eps1_sat - along_x2),
                "note": "the closed form is the thickness down to the component where the cover-3 "
                "satellite point branches off; the cover-2 satellite pair sits a further eps23 deeper",
            },
        }


def thickness_solution(ct: ConductorType) -> ThicknessSolution:
    if ct.n_covers != 3:
        raise PreconditionViolated("thicknesses are defined for three covers")
    m1, m2, m3 = ct.m
    m = 2 * m3 + m2 - m1
    return ThicknessSolution(
        m=m,
        eps0=F(1, m),
        eps1=F(1, 2),
        eps12=F(m2 - m1, 2 * m),
        eps23=F(m3 - m2, m),
        eps1_sat=F(3 * m3 + 2 * m2 - 2 * m1, m),
        eps23_sat=F(m3 - m2, m),
        rho_exps=(F(1, 2), F(m3 + m2 - m1, m), F(2 * m3 - m1, m)),
        mt=(m1, m2, m3),
    )


@dataclass
class CoverParams:
    index: int
    r: int
    s: int
    rho_exp: Fraction
    rho1_exp: Optional[Fraction] = None
    rho2_exp: Optional[Fraction] = None

    @property
    def n(self) -> int:
        return 2 * self.r + self.s if self.rho1_exp is not None else self.r


@dataclass
class RhoParameters:
    n_covers: int
    m: int  # the denominator of rho0's exponent
    rho0_exp: Fraction
    covers: list
    varrho_exps: tuple = ()

    @property
    def M(self) -> int:
        return 4 * self.m

    def rho_vals(self) -> list:
        return [c.rho_exp for c in self.covers]


def rho_parameters(ct: ConductorType) -> RhoParameters:
    rej = validate_type(ct)
    if rej is not None:
        raise PreconditionViolated(str(rej))
    if ct.n_covers == 2:
        m1, m2 = ct.m
        covers = [
            CoverParams(1, (m1 + 1) // 2, 0, 2 - F(m1, m2)),
            CoverParams(2, (m2 + 1) // 2, 0, F(1)),
        ]
        params = RhoParameters(2, m2, F(1, m2), covers)
    else:
        m1, m2, m3 = ct.m
        th = thickness_solution(ct)
        v1, v2, v3 = th.rho_exps
        r = (m1 + 1) // 4
        covers = [
            CoverParams(1, r, 0, 2 * v2 + v3, v2, v3),
            CoverParams(2, r, (m2 - m1) // 2, 2 * v1 + v3, v1, v3),
            CoverParams(3, r, (m3 - m1) // 2, 2 * v1 + v2, v1, v2),
        ]
        params = RhoParameters(3, th.m, F(1, th.m), covers, th.rho_exps)
    for c, mk in zip(params.covers, ct.m):
        if not (1 <= c.rho_exp < 2):
            raise PreconditionViolated(f"cover {c.index}: v(rho) = {c.rho_exp} outside [1, 2)")
        if c.rho1_exp is not None and not (F(1, 2) <= c.rho1_exp <= c.rho2_exp):
            raise PreconditionViolated(f"cover {c.index}: valuation chain for rho1, rho2 fails")
        # (4/rho)^(1/(2n-1)) must be the common rho0
        if (2 - c.rho_exp) / mk != params.rho0_exp:
            raise PreconditionViolated(f"cover {c.index}: rho0 mismatch")
    return params


def seed_count(ct: ConductorType) -> int:
    m = ct.m
    if len(m) == 2:
        return (m[1] + 1) // 2
    return (m[0] + 1) // 4 + (m[2] - m[0]) // 2


def pick_seed_residues(count: int, fld: FieldCtx, seed: int) -> list:
    """Distinct nonzero residues chosen by a seeded RNG."""
    q1 = fld.order - 1
    if count > q1:
        raise ResidueFieldTooSmall(f"{count} seeds need 2^d - 1 >= {count}, have {q1}")
    rng = random.Random(seed)
    picks: list = []
    while len(picks) < count:
        v = rng.randrange(1, q1 + 1)
        if v not in picks:
            picks.append(v)
    return [fld(v) for v in picks]


def choose_branch_seeds(count: int, ctx: RingCtx, seed: int, residues: Optional[list] = None) -> list:
    """Teichmueller lifts of distinct nonzero residues (given, or picked from the seed)."""
    if residues is None:
        residues = pick_seed_residues(count, ctx.field, seed)
    if len(residues) != count or len({r.value for r in residues}) != count or not all(residues):
        raise PreconditionViolated(f"need {count} distinct nonzero seed residues")
    return [teichmuller(ctx, r) for r in residues]


def sqrt_teich(x: RElem) -> RElem:
    """Square root of a Teichmueller unit (again a Teichmueller unit)."""
    return teichmuller(x.ctx, ff_sqrt(x.residue()))


# ---------------------------------------------------------------- plans


@dataclass
class CoverPlan:
    index: int
    params: CoverParams
    eq: ASEquation
    seeds: list
    A: list
    rho: RElem
    rho0_exp: Fraction
    table: object = None
    coeffs: dict = field(default_factory=dict)
    factors: list = field(default_factory=list)  # list of root lists
    f: Optional[RPoly] = None
    Q0: Optional[RPoly] = None
    interpretations: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.eq.n

    def roots(self) -> list:
        return [x for fac in self.factors for x in fac]

    def labelled_roots(self) -> list:
        """(name, root) pairs; names record which factor a root came from."""
        out = []
        for k, fac in enumerate(self.factors):
            for j, x in enumerate(fac):
                out.append((f"F{k}.{j}", x))
        return out


def lifted_coefficients(ctx: RingCtx, eq: ASEquation) -> list:
    return [teichmuller(ctx, a) for a in eq.coeffs]


# ---------------------------------------------------------------- two covers


def build_cover_n2(eq: ASEquation, rho: RElem, rho0_exp: Fraction, seeds: list, index: int = 1,
                   params: Optional[CoverParams] = None) -> CoverPlan:
    ctx = rho.ctx
    r = eq.n
    vr = r_valuation(rho)
    if not (1 <= vr < 2):
        raise PreconditionViolated(f"v(rho) = {vr} must lie in [1, 2)")
    if len(seeds) != r:
        raise PreconditionViolated(f"need {r} seeds, got {len(seeds)}")
    if (2 - vr) / (2 * r - 1) != rho0_exp:
        raise PreconditionViolated("rho * rho0^(2r-1) != 4")
    rho0 = two_power(ctx, rho0_exp)
    rho_half = two_power(ctx, vr / 2) if rho.val % 2 == 0 else r_sqrt(rho)
    A = lifted_coefficients(ctx, eq)
    table = simple_table(seeds)
    c1s, c2s, roots = [], [], []
    for i, xi in enumerate(seeds):
        xh = sqrt_teich(xi)
        c1 = ctx.zero()
        c2 = ctx.zero()
        for ell in range(r):
            g = table.rows[ell][i]
            c1 = c1 + rho0 ** (2 * ell) * A[ell] * A[ell] * g * g
            c2 = c2 + rho0 ** ell * A[ell] * g * xh
        c1s.append(c1)
        c2s.append(c2)
        shift = rho * c1 + 2 * rho_half * c2
        roots.append([xi, xi - shift])
    f = RPoly(ctx, [1])
    for fac in roots:
        f = f * RPoly.from_roots(ctx, fac)
    Q = RPoly.from_roots(ctx, seeds)
    Q0 = Q
    for i, xi in enumerate(seeds):
        Q0 = Q0 + RPoly.from_roots(ctx, seeds[:i] + seeds[i + 1:]).scale(rho_half * c2s[i])
    if params is None:
        params = CoverParams(index, r, 0, vr)
    plan = CoverPlan(index, params, eq, list(seeds), A, rho, rho0_exp, table,
                     {"c1": c1s, "c2": c2s}, roots, f, Q0,
                     ["Q0 uses the double sum over centers i and exponents l"])
    return plan


def construct_n2(ct: ConductorType, eqs: list, ctx: RingCtx, seed: int, residues: Optional[list] = None):
    params = rho_parameters(ct)
    seeds = choose_branch_seeds(seed_count(ct), ctx, seed, residues)
    plans = []
    for cp, eq in zip(params.covers, eqs):
        rho = two_power(ctx, cp.rho_exp)
        plans.append(build_cover_n2(eq, rho, params.rho0_exp, seeds[: cp.r], cp.index, cp))
    return params, plans, {}


# ---------------------------------------------------------------- three covers


def fourth_root_mod2(x: RElem) -> RElem:
    """Some z with v(z^4 - x) >= 1 (enough for congruences mod 4 after scaling)."""
    M = x.ctx.M
    y = r_sqrt(x, prec=M)
    return r_sqrt(y, prec=M // 2)


def simplified_coefficients(plan: CoverPlan, rho1: RElem) -> dict:
    """alpha_i, beta_i, mu_i, w_i ~ mu_i^(1/2), beta'_i, gamma_j and the Q0 weights."""
    ctx = plan.rho.ctx
    cp = plan.params
    r, s, n = cp.r, cp.s, cp.n
    rho = plan.rho
    rho0 = two_power(ctx, plan.rho0_exp)
    rho_half = two_power(ctx, cp.rho_exp / 2)
    two_over_rho_half = two_power(ctx, 1 - cp.rho_exp / 2)
    k = two_power(ctx, F(3, 2) - F(3, 4) * cp.rho_exp)
    if F(3, 2) - F(3, 4) * cp.rho_exp < 0:
        raise UnexpectedNegativeValuation("2^(3/2) rho^(-3/4) is not integral")
    A = plan.A
    dc, sc = plan.seeds[:r], plan.seeds[r:r + s]
    tab = plan.table
    out = {k_: [] for k_ in ("alpha", "beta", "mu", "w", "beta_p", "c_beta", "gamma", "c_gamma")}
    for i, xi in enumerate(dc):
        xh = sqrt_teich(xi)
        al = be = mu = cb = ctx.zero()
        for ell in range(n):
            a_il, b_il, _ = tab.rows[ell]
            a, b = a_il[i], b_il[i]
            p2 = rho0 ** (2 * ell) * A[ell] * A[ell]
            p1 = rho0 ** ell * A[ell]
            al = al + p2 * a * a
            be = be + p2 * b * b + two_over_rho_half * p1 * b * xh
            mu = mu + p1 * a * xh
            cb = cb + p1 * b * xh
        if r_valuation(al) != 0:
            raise ValuationCheckFailed(f"alpha_{i + 1} is not a unit")
        w = r_sqrt(mu, prec=ctx.M)
        bp = be - k * w
        if bp.is_zero() is False and r_valuation(bp) < 0:
            raise UnexpectedNegativeValuation(f"v(beta'_{i + 1}) = {r_valuation(bp)} < 0")
        for key, val in zip(("alpha", "beta", "mu", "w", "beta_p", "c_beta"), (al, be, mu, w, bp, cb)):
            out[key].append(val)
    for j, xj in enumerate(sc):
        xh = sqrt_teich(xj)
        ga = cg = ctx.zero()
        for ell in range(n):
            g = tab.rows[ell][2][j]
            p1 = rho0 ** ell * A[ell]
            ga = ga + rho0 ** (2 * ell) * A[ell] * A[ell] * g * g + two_over_rho_half * p1 * g * xh
            cg = cg + p1 * g * xh
        if r_valuation(ga) != 0:
            raise ValuationCheckFailed(f"gamma_{j + 1} is not a unit")
        out["gamma"].append(ga)
        out["c_gamma"].append(cg)
    del rho, rho_half, rho1
    return out


def quartic_identity_expand(a1, a2):
    """Both sides of X(X+a1^2)(X+a2^2)(X+(a1+a2)^2) = (X^2+(a1^2+a2^2+a1a2)X)^2 + a1^2a2^2(a1+a2)^2 X.

    Ring elements give RPoly pairs; plain integers give integer coefficient lists.
    """
    if isinstance(a1, int) and isinstance(a2, int):
        def mul(p, q):
            out = [0] * (len(p) + len(q) - 1)
            for i, x in enumerate(p):
                for j, y in enumerate(q):
                    out[i + j] += x * y
            return out

        lhs = [0, 1]
        for c in (a1 * a1, a2 * a2, (a1 + a2) ** 2):
            lhs = mul(lhs, [c, 1])
        inner = [0, a1 * a1 + a2 * a2 + a1 * a2, 1]
        rhs = mul(inner, inner)
        rhs[1] += a1 * a1 * a2 * a2 * (a1 + a2) ** 2
        return lhs, rhs
    ctx = a1.ctx
    X = RPoly.X(ctx)
    lhs = X
    for c in (a1 * a1, a2 * a2, (a1 + a2) * (a1 + a2)):
        lhs = lhs * RPoly(ctx, [c, 1])
    inner = RPoly(ctx, [0, a1 * a1 + a2 * a2 + a1 * a2, 1])
    rhs = inner * inner + X.scale(a1 * a1 * a2 * a2 * (a1 + a2) * (a1 + a2))
    return lhs, rhs


@dataclass
class SymmetricRoots:
    u: tuple
    a: tuple
    N: RElem
    pi3: RElem
    checks: dict


def symmetric_roots_from_u(u1: RElem, u2: RElem, u3: RElem, targets=None) -> SymmetricRoots:
    """a_j from u_j via the symmetric-function formulas, with the accompanying checks."""
    ctx = u1.ctx
    us = (u1, u2, u3)
    sums = {"u1+u2": u1 + u2, "u1+u3": u1 + u3, "u2+u3": u2 + u3, "u1+u2+u3": u1 + u2 + u3}
    vs = [r_valuation(u) for u in us]
    for name, val in sums.items():
        idx = [int(c) - 1 for c in name.replace("u", "").split("+")]
        expect = min(vs[i] for i in idx)
        if val.is_zero() or r_valuation(val) != expect:
            raise MinValuationViolated(f"v({name}) != min of the summands ({expect})")
    pi3 = u1 * u2 * u3 * sums["u1+u2"] * sums["u1+u3"] * sums["u2+u3"] * sums["u1+u2+u3"]
    cube = r_root(pi3, 3)
    a1 = u2 * u3 * sums["u2+u3"] / cube
    a2 = u1 * u3 * sums["u1+u3"] / cube
    a3 = u1 * u2 * sums["u1+u2"] / cube
    N = u1 * u2 * u3 * u3 / (sums["u1+u2"] * sums["u1+u2+u3"])
    full = F(ctx.N, ctx.M) - 2
    checks = {
        "v(N)>=0": (not N.is_zero() and r_valuation(N) >= 0) or N.is_zero(),
        "identity_a1a2": (a1 * a2 * (a1 + a2)).close_to(u3 * u3 - 2 * N, full),
    }
    if targets is not None:
        a = (a1, a2, a3)
        pairs = ((1, 2), (0, 2), (0, 1))
        for k, (p, q) in enumerate(pairs):
            lhs = a[p] * a[p] * a[q] * a[q] * (a[p] + a[q]) * (a[p] + a[q])
            checks[f"S{k + 1}"] = lhs.close_to(targets[k], F(2))
    return SymmetricRoots(us, (a1, a2, a3), N, pi3, checks)


def symmetric_roots(alpha1: RElem, alpha2: RElem, alpha3: RElem, params: RhoParameters) -> SymmetricRoots:
    ctx = alpha1.ctx
    targets, us = [], []
    for cp, al in zip(params.covers, (alpha1, alpha2, alpha3)):
        if r_valuation(al) != 0:
            raise PreconditionViolated("alpha must be a unit")
        targets.append(two_power(ctx, cp.rho_exp) * al)
        us.append(two_power(ctx, cp.rho_exp / 4) * fourth_root_mod2(al))
    res = symmetric_roots_from_u(*us, targets=targets)
    v = params.varrho_exps
    for j in range(3):
        if r_valuation(res.a[j]) != v[j] / 2:
            raise ValuationCheckFailed(f"v(a_{j + 1}) = {r_valuation(res.a[j])} != {v[j] / 2}")
    if not all(res.checks.values()):
        bad = [k for k, ok in res.checks.items() if not ok]
        raise ValuationCheckFailed(f"symmetric-root checks failed: {bad}")
    return res


def ensure_distinct(elems: list, threshold: Fraction, seed: int, ctx: RingCtx, budget: int = 8):
    """Make elements pairwise distinct (v(diff) < threshold) by adding 4*[t] to later ones.

    Returns (elements, perturbation log).  Element 0 is never moved.
    """
    elems = list(elems)
    log = []
    rng = random.Random(f"distinct:{seed}")
    for j in range(1, len(elems)):
        tries = 0
        while True:
            clash = [i for i in range(j) if (elems[i] - elems[j]).valuation_lower_bound() >= threshold]
            if not clash:
                break
            if tries >= budget:
                raise DistinctnessUnresolvable(f"element {j} still collides after {budget} perturbations")
            t = ctx.field(rng.randrange(1, ctx.field.order))
            elems[j] = elems[j] + 4 * teichmuller(ctx, t)
            log.append({"element": j, "residue": t.bits()})
            tries += 1
    return elems, log


def distinct_threshold(params: RhoParameters) -> Fraction:
    return 2 * max(params.rho_vals()) + 1


def construct_n3(ct: ConductorType, eqs: list, ctx: RingCtx, seed: int, force_collision: bool = False,
                 residues: Optional[list] = None):
    params = rho_parameters(ct)
    seeds = choose_branch_seeds(seed_count(ct), ctx, seed, residues)
    v = params.varrho_exps
    varrho = [two_power(ctx, e) for e in v]
    plans = []
    for cp, eq in zip(params.covers, eqs):
        if eq.n != cp.n:
            raise PreconditionViolated(f"cover {cp.index}: equation has n = {eq.n}, expected {cp.n}")
        rho = two_power(ctx, cp.rho_exp)
        plan = CoverPlan(cp.index, cp, eq, seeds[: cp.r + cp.s], lifted_coefficients(ctx, eq), rho,
                         params.rho0_exp)
        plan.table = mixed_table(seeds[: cp.r], seeds[cp.r: cp.r + cp.s])
        plan.coeffs = simplified_coefficients(plan, two_power(ctx, cp.rho1_exp))
        plans.append(plan)
    r = params.covers[0].r
    groups = []
    thr = distinct_threshold(params)
    pairs = {1: (1, 2), 2: (0, 2), 3: (0, 1)}  # cover k uses a_p, a_q with {p, q} = others
    for i in range(r):
        p4 = symmetric_roots(*(plan.coeffs["alpha"][i] for plan in plans), params)
        a = p4.a
        sq = [x * x for x in a]
        tails = []
        for plan in plans:
            p, q = pairs[plan.index]
            tails.append((a[p] + a[q]) * (a[p] + a[q]) + plan.rho * plan.coeffs["beta_p"][i])
        seven = [ctx.zero(), sq[0], sq[1], sq[2]] + tails
        if force_collision:
            seven[6] = seven[5]
        seven, log = ensure_distinct(seven, thr, seed * 1000 + i, ctx)
        sq, tails = seven[1:4], seven[4:7]
        groups.append({"symmetric_roots": p4, "shifts": seven, "perturbations": log})
        for plan in plans:
            p, q = pairs[plan.index]
            cp = plan.params
            rho1 = two_power(ctx, cp.rho1_exp)
            num = a[p] * a[p] + a[q] * a[q] + a[p] * a[q]
            if num.valuation_lower_bound() < cp.rho1_exp and not num.is_zero():
                raise ValuationCheckFailed(f"v(a_p^2 + a_q^2 + a_p a_q) < v(rho1) for cover {plan.index}")
            dp = num / rho1
            w = plan.coeffs["w"][i]
            corr = two_power(ctx, F(1, 2) + cp.rho_exp / 4 - cp.rho1_exp) * w
            plan.coeffs.setdefault("delta_p", []).append(dp)
            plan.coeffs.setdefault("delta", []).append(dp - corr)
            xi = seeds[i]
            plan.factors.append([xi, xi - sq[p], xi - sq[q], xi - tails[plan.index - 1]])
    for plan in plans:
        cp = plan.params
        for j in range(cp.s):
            xj = seeds[cp.r + j]
            plan.factors.append([xj, xj - plan.rho * plan.coeffs["gamma"][j]])
        assemble(plan)
    return params, plans, {"groups": groups, "varrho": varrho}


def assemble(plan: CoverPlan) -> CoverPlan:
    """Expand f from the factors and build Q0 = Q^ + rho^(1/2) Q1^2 Q2 (partial fraction sum)."""
    ctx = plan.rho.ctx
    cp = plan.params
    r, s = cp.r, cp.s
    f = RPoly(ctx, [1])
    for fac in plan.factors:
        f = f * RPoly.from_roots(ctx, fac)
    rho1 = two_power(ctx, cp.rho1_exp)
    rho_half = two_power(ctx, cp.rho_exp / 2)
    dc, sc = plan.seeds[:r], plan.seeds[r:r + s]
    Qhat = RPoly(ctx, [1])
    for i, xi in enumerate(dc):
        Z = RPoly.linear(ctx, xi)
        Qhat = Qhat * (Z * Z + Z.scale(rho1 * plan.coeffs["delta"][i]))
    for xj in sc:
        Qhat = Qhat * RPoly.linear(ctx, xj)
    allc = dc + sc
    H_lin = [RPoly.linear(ctx, x) for x in allc]

    def prod_except(skip_double: Optional[int], power_drop: int, skip_simple: Optional[int]):
        p = RPoly(ctx, [1])
        for k in range(r):
            e = 2 - (power_drop if k == skip_double else 0)
            for _ in range(e):
                p = p * H_lin[k]
        for k in range(s):
            if k != skip_simple:
                p = p * H_lin[r + k]
        return p

    acc = RPoly(ctx, [])
    for i in range(r):
        acc = acc + prod_except(i, 2, None).scale(plan.coeffs["mu"][i])
        acc = acc + prod_except(i, 1, None).scale(plan.coeffs["c_beta"][i])
    for j in range(s):
        acc = acc + prod_except(None, 0, j).scale(plan.coeffs["c_gamma"][j])
    plan.f = f
    plan.Q0 = Qhat + acc.scale(rho_half)
    plan.interpretations = ["Q^ uses delta = delta' - 2^(1/2) rho^(1/4) w / rho1 with w^2 ~ mu"]
    if f.degree != 2 * plan.eq.n:
        raise ConstructionError(f"cover {plan.index}: degree {f.degree} != {2 * plan.eq.n}")
    return plan


def unhatted_factor(plan: CoverPlan, i: int) -> RPoly:
    """The quartic [Z^2 + rho1 delta' Z]^2 + rho beta' Z^3 + rho alpha Z, Z = X - X_i."""
    ctx = plan.rho.ctx
    cp = plan.params
    Z = RPoly.linear(ctx, plan.seeds[i])
    rho1 = two_power(ctx, cp.rho1_exp)
    inner = Z * Z + Z.scale(rho1 * plan.coeffs["delta_p"][i])
    return inner * inner + (Z * Z * Z).scale(plan.rho * plan.coeffs["beta_p"][i]) + Z.scale(
        plan.rho * plan.coeffs["alpha"][i])


def unhatted_cubic_cofactor(plan: CoverPlan, i: int) -> RPoly:
    """Cubic cofactor of the unhatted quartic, recentred at X_i."""
    ctx = plan.rho.ctx
    cp = plan.params
    rho1 = two_power(ctx, cp.rho1_exp)
    dp = plan.coeffs["delta_p"][i]
    return RPoly(ctx, [plan.rho * plan.coeffs["alpha"][i], rho1 * rho1 * dp * dp,
                       2 * rho1 * dp + plan.rho * plan.coeffs["beta_p"][i], 1])


# ---------------------------------------------------------------- entry point


@dataclass
class Construction:
    ct: ConductorType
    ctx: RingCtx
    eqs: list
    params: RhoParameters
    plans: list
    extra: dict
    seed: int


def ring_for(ct: ConductorType, field_ctx: FieldCtx, precision_factor: int = 1) -> RingCtx:
    params = rho_parameters(ct)
    return RingCtx.make(field_ctx, params.M, precision_factor)


def construct(ct: ConductorType, eqs: list, field_ctx: FieldCtx, seed: int, precision_factor: int = 1,
              force_collision: bool = False, seed_residues: Optional[list] = None) -> Construction:
    ctx = ring_for(ct, field_ctx, precision_factor)
    if ct.n_covers == 2:
        params, plans, extra = construct_n2(ct, eqs, ctx, seed, seed_residues)
    else:
        params, plans, extra = construct_n3(ct, eqs, ctx, seed, force_collision, seed_residues)
    return Construction(ct, ctx, eqs, params, plans, extra, seed)
