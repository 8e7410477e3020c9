"""Independent checks on constructed covers and the certificate format.

Everything here works from the expanded polynomials f and Q0, the listed
roots and the equations; none of the construction's intermediate
quantities is trusted.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .as_input import ASEquation, ConductorType, validate_independence, validate_type
from .construct import (
    Construction,
    CoverParams,
    CoverPlan,
    RhoParameters,
    rho_parameters,
    thickness_solution,
)
from .padic import RElem, RingCtx, r_valuation, two_power
from .poly import RPoly
from .residue_field import field as field_of_degree

FORMAT = "twoadic-lift-certificate/1"


class VerifyError(ArithmeticError):
    pass


class RootsCollide(VerifyError):
    pass


class UltrametricViolated(VerifyError):
    pass


class CertificateFormatError(ValueError):
    pass


F = Fraction


def equality_threshold(ctx: RingCtx) -> Fraction:
    return F(ctx.N, ctx.M) - 1


def distinct_threshold(rho_exps) -> Fraction:
    return 2 * max(rho_exps) + 1


def _v(x: RElem) -> Fraction:
    """Valuation, with zero elements counted by their precision bound."""
    return x.valuation_lower_bound() if x.is_zero() else r_valuation(x)


# ---------------------------------------------------------------- good reduction


def good_reduction_check(plan: CoverPlan, eq: ASEquation) -> dict:
    ctx = plan.rho.ctx
    n = eq.n
    rho0 = two_power(ctx, plan.rho0_exp)
    X = RPoly.X(ctx)
    S = RPoly(ctx, [])
    for ell, A in enumerate(plan.A):
        S = S + (X ** (2 * ell + 1)).scale(rho0 ** (2 * ell) * A * A)
    D = plan.f - plan.Q0 * plan.Q0 - S.scale(plan.rho)
    worst_idx, worst_v, residual = None, None, F(0)
    for k, c in enumerate(D.coeffs):
        v = _v(c)
        if worst_v is None or v < worst_v:
            worst_idx, worst_v = k, v
        residual = max(residual, 2 - v)
    high = [k for k in range(2 * n, D.degree + 1)]
    residues = []
    for ell, (A, a) in enumerate(zip(plan.A, eq.coeffs)):
        residues.append(A.residue() * A.residue() == a * a)
    rho_ok = r_valuation(plan.rho) + (2 * n - 1) * plan.rho0_exp == 2 and plan.rho.close_to(
        two_power(ctx, r_valuation(plan.rho)), equality_threshold(ctx))
    checks = {
        "f_monic_degree": plan.f.degree == 2 * n and plan.f[2 * n].close_to(1, equality_threshold(ctx)),
        "Q0_monic_integral": plan.Q0.degree == n and plan.Q0[n].close_to(1, equality_threshold(ctx))
        and plan.Q0.min_coeff_valuation() >= 0,
        "D_degree": D.degree <= 2 * n - 1 or all(_v(D[k]) >= equality_threshold(ctx) for k in high),
        "D_in_4R": residual == 0,
        "A_residues": len(plan.A) == n and all(residues),
        "rho_rho0_is_4": rho_ok,
    }
    return {
        "checks": checks,
        "pass": all(checks.values()),
        "residual": str(residual),
        "D_degree": D.degree,
        "worst_coefficient": None if worst_idx is None else {"index": worst_idx, "valuation": str(worst_v)},
        "D_valuations": [str(_v(c)) for c in D.coeffs],
    }


# ---------------------------------------------------------------- branch points


@dataclass
class BranchSet:
    index: int
    roots: list
    eps0: Fraction

    def __len__(self):
        return len(self.roots)

    def distance(self, i: int, j: int) -> Fraction:
        return self.eps0 + r_valuation(self.roots[i] - self.roots[j])


def branch_points(plan: CoverPlan) -> BranchSet:
    """Roots read off the factored form, checked against the expanded f."""
    ctx = plan.rho.ctx
    roots = plan.roots()
    if len(roots) != 2 * plan.eq.n:
        raise RootsCollide(f"cover {plan.index}: {len(roots)} roots for conductor {2 * plan.eq.n}")
    prod = RPoly.from_roots(ctx, roots)
    eqt = equality_threshold(ctx)
    diff = plan.f - prod
    if any(_v(c) < eqt for c in diff.coeffs):
        raise RootsCollide(f"cover {plan.index}: listed roots do not multiply out to f")
    for i, j in itertools.combinations(range(len(roots)), 2):
        dv = _v(roots[i] - roots[j])
        if dv >= eqt:
            raise RootsCollide(f"cover {plan.index}: roots {i} and {j} agree to v >= {eqt}")
    return BranchSet(plan.index, roots, plan.rho0_exp)


def points_equal(x: RElem, y: RElem, ctx: RingCtx) -> bool:
    return (x - y).valuation_lower_bound() >= equality_threshold(ctx)


def intersection_counts(sets: list, ctx: RingCtx, rho_exps) -> dict:
    """|intersection| for every nonempty subset, against (min m + 1) / 2^(r-1)."""
    eqt, dst = equality_threshold(ctx), distinct_threshold(rho_exps)
    undecided = 0
    for a, b in itertools.combinations(range(len(sets)), 2):
        for x in sets[a].roots:
            for y in sets[b].roots:
                v = _v(x - y)
                if dst <= v < eqt:
                    undecided += 1
    table = {}
    for r in range(1, len(sets) + 1):
        for sub in itertools.combinations(range(len(sets)), r):
            first = sets[sub[0]]
            count = sum(
                1 for x in first.roots
                if all(any(points_equal(x, y, ctx) for y in sets[k].roots) for k in sub[1:])
            )
            target = F(min(len(sets[k]) for k in sub), 2 ** (r - 1))
            key = "".join(str(sets[k].index) for k in sub)
            table[key] = {"count": count, "target": str(target), "pass": count == target}
    return {"table": table, "undecided_pairs": undecided,
            "pass": undecided == 0 and all(e["pass"] for e in table.values())}


def hurwitz_sum_check(bs: BranchSet) -> dict:
    """For every branch point, the sum over the others of v_T must be exactly 2."""
    sums, breaks = [], []
    for i in range(len(bs)):
        ds = [bs.distance(i, j) for j in range(len(bs)) if j != i]
        sums.append(sum(ds, F(0)))
        hist: dict = {}
        for d in ds:
            hist[d] = hist.get(d, 0) + 1
        breaks.append([[str(d), hist[d]] for d in sorted(hist)])
    return {
        "sums": [str(s) for s in sums],
        "break_sequences": breaks,
        "pass": all(s == 2 for s in sums),
    }


# ---------------------------------------------------------------- trees


@dataclass
class Node:
    depth: Optional[Fraction]  # None for leaves
    label: str = ""
    children: tuple = ()

    def canon(self):
        if self.depth is None:
            return self.label
        return (str(self.depth), tuple(sorted((c.canon() for c in self.children), key=repr)))

    def to_json(self):
        if self.depth is None:
            return self.label
        return {"depth": str(self.depth), "children": [c.to_json() for c in
                                                        sorted(self.children, key=lambda c: repr(c.canon()))]}

    def depths(self) -> set:
        if self.depth is None:
            return set()
        out = {self.depth}
        for c in self.children:
            out |= c.depths()
        return out


def leaf(label: str) -> Node:
    return Node(None, label)


def node(depth, children) -> Node:
    return Node(F(depth), "", tuple(children))


def normalize(t: Node) -> Node:
    """Merge internal children sitting at their parent's depth; drop single-child nodes.

    A lone child hides its parent's depth from any clustering of the points,
    so both built and expected trees are compared in this reduced form.
    """
    if t.depth is None:
        return t
    if len(t.children) == 1:
        return normalize(t.children[0])
    kids = []
    for c in (normalize(c) for c in t.children):
        if c.depth is not None and c.depth == t.depth:
            kids.extend(c.children)
        else:
            kids.append(c)
    return Node(t.depth, "", tuple(kids))


def check_ultrametric(dist: list) -> None:
    """dist[i][j] are separation depths; the two smallest of each triangle must agree."""
    n = len(dist)
    for i, j, k in itertools.combinations(range(n), 3):
        a, b, c = sorted((dist[i][j], dist[j][k], dist[i][k]))
        if a != b:
            raise UltrametricViolated(f"points {i}, {j}, {k}: depths {a}, {b}, {c}")


def cluster(labels: list, dist: list) -> Node:
    check_ultrametric(dist)

    def rec(idx: list) -> Node:
        if len(idx) == 1:
            return leaf(labels[idx[0]])
        h = min(dist[i][j] for i, j in itertools.combinations(idx, 2))
        parts: list = []
        for i in idx:
            for p in parts:
                if dist[i][p[0]] > h:
                    p.append(i)
                    break
            else:
                parts.append([i])
        return node(h, [rec(p) for p in parts])

    return rec(list(range(len(labels))))


def joint_points(sets: list, ctx: RingCtx) -> list:
    """Union of branch sets; each point labelled by the covers containing it."""
    pts: list = []
    for bs in sets:
        for x in bs.roots:
            for p in pts:
                if points_equal(p[1], x, ctx):
                    p[0].add(bs.index)
                    break
            else:
                pts.append([{bs.index}, x])
    return [("".join(map(str, sorted(s))), x) for s, x in pts]


def tree_build(sets: list, ctx: RingCtx) -> Node:
    eps0 = sets[0].eps0
    if len(sets) == 1:
        pts = [(str(sets[0].index), x) for x in sets[0].roots]
    else:
        pts = joint_points(sets, ctx)
    dist = [[None] * len(pts) for _ in pts]
    for i, j in itertools.combinations(range(len(pts)), 2):
        dist[i][j] = dist[j][i] = eps0 + r_valuation(pts[i][1] - pts[j][1])
    return normalize(cluster([p[0] for p in pts], dist))


def expected_cover_tree(params: RhoParameters, k: int) -> Node:
    """Per-cover shape: groups split in two pairs, satellites are pairs."""
    cp = params.covers[k]
    e0 = params.rho0_exp
    L = str(cp.index)
    kids = []
    if params.n_covers == 2:
        kids = [node(e0 + cp.rho_exp, [leaf(L), leaf(L)]) for _ in range(cp.r)]
    else:
        for _ in range(cp.r):
            pair = node(e0 + cp.rho2_exp, [leaf(L), leaf(L)])
            kids.append(node(e0 + cp.rho1_exp, [pair, pair]))
        kids += [node(e0 + cp.rho_exp, [leaf(L), leaf(L)]) for _ in range(cp.s)]
    return normalize(node(e0, kids))


def expected_joint_tree(ct: ConductorType) -> Node:
    """Joint shape written directly in terms of the thickness solution."""
    if ct.n_covers == 2:
        m1, m2 = ct.m
        e0 = F(1, m2)
        kids = []
        for _ in range((m1 + 1) // 2):
            kids.append(node(e0 + 1, [node(e0 + 2 - F(m1, m2), [leaf("12"), leaf("1")]), leaf("2")]))
        for _ in range((m2 - m1) // 2):
            kids.append(node(e0 + 1, [leaf("2"), leaf("2")]))
        return normalize(node(e0, kids))
    m1, m2, m3 = ct.m
    th = thickness_solution(ct)
    e0 = th.eps0
    d1 = e0 + th.eps1
    d2 = d1 + th.eps12
    d3 = d2 + th.eps23
    s1 = e0 + th.eps1_sat
    s2 = s1 + th.eps23_sat
    kids = []
    for _ in range((m1 + 1) // 4):
        side_a = node(d2, [node(d3, [leaf("123"), leaf("12")]), node(d3, [leaf("13"), leaf("1")])])
        side_b = node(d2, [node(d3, [leaf("23"), leaf("2")]), leaf("3")])
        kids.append(node(d1, [side_a, side_b]))
    for _ in range((m2 - m1) // 2):
        kids.append(node(s1, [node(s2, [leaf("23"), leaf("2")]), leaf("3")]))
    for _ in range((m3 - m2) // 2):
        kids.append(node(s1, [leaf("3"), leaf("3")]))
    return normalize(node(e0, kids))


def group_census(pts: list, n_covers: int) -> dict:
    """Classes of joint points that reduce to the same residue, sorted by kind.

    A class holding a point of every cover is a group; a class holding a point
    shared by some covers is a shared satellite; the rest are single satellites.
    """
    full = "".join(str(k) for k in range(1, n_covers + 1))
    classes: list = []
    for lab, x in pts:
        for c in classes:
            if (c[0][1] - x).valuation_lower_bound() > 0:
                c.append((lab, x))
                break
        else:
            classes.append([(lab, x)])
    census = {"groups": 0, "shared_satellites": 0, "single_satellites": 0, "class_sizes": []}
    for c in classes:
        labs = [lab for lab, _ in c]
        census["class_sizes"].append(len(c))
        if full in labs:
            census["groups"] += 1
        elif any(len(x) > 1 for x in labs):
            census["shared_satellites"] += 1
        else:
            census["single_satellites"] += 1
    census["class_sizes"].sort()
    return census


def expected_census(ct: ConductorType) -> dict:
    m = ct.m
    if len(m) == 2:
        return {"groups": (m[0] + 1) // 2, "shared_satellites": 0, "single_satellites": (m[1] - m[0]) // 2}
    return {"groups": (m[0] + 1) // 4, "shared_satellites": (m[1] - m[0]) // 2,
            "single_satellites": (m[2] - m[1]) // 2}


# ---------------------------------------------------------------- plan serialization


def plan_to_json(plan: CoverPlan) -> dict:
    cp = plan.params
    return {
        "index": plan.index,
        "r": cp.r,
        "s": cp.s,
        "rho_exponent": str(cp.rho_exp),
        "rho1_exponent": None if cp.rho1_exp is None else str(cp.rho1_exp),
        "rho2_exponent": None if cp.rho2_exp is None else str(cp.rho2_exp),
        "rho0_exponent": str(plan.rho0_exp),
        "equation": plan.eq.to_json(),
        "A": [a.to_json() for a in plan.A],
        "f": plan.f.to_json(),
        "Q0": plan.Q0.to_json(),
        "factors": [[x.to_json() for x in fac] for fac in plan.factors],
    }


def plan_from_json(ctx: RingCtx, obj: dict) -> CoverPlan:
    def fr(s):
        return None if s is None else F(s)

    cp = CoverParams(int(obj["index"]), int(obj["r"]), int(obj["s"]), F(obj["rho_exponent"]),
                     fr(obj.get("rho1_exponent")), fr(obj.get("rho2_exponent")))
    eq = ASEquation([ctx.field.from_bits(b) for b in obj["equation"]])
    plan = CoverPlan(cp.index, cp, eq, [], [RElem.from_json(ctx, a) for a in obj["A"]],
                     two_power(ctx, cp.rho_exp), F(obj["rho0_exponent"]))
    plan.f = RPoly.from_json(ctx, obj["f"])
    plan.Q0 = RPoly.from_json(ctx, obj["Q0"])
    plan.factors = [[RElem.from_json(ctx, x) for x in fac] for fac in obj["factors"]]
    return plan


# ---------------------------------------------------------------- certificate


def verify_plans(ct: ConductorType, ctx: RingCtx, plans: list) -> dict:
    """Run every check; returns the per-cover and joint sections plus verdicts."""
    checks: dict = {}
    rej = validate_type(ct)
    checks["validate_type"] = rej is None
    eqs = [p.eq for p in plans]
    checks["validate_independence"] = validate_independence(eqs) is None
    checks["cover_count"] = len(plans) == ct.n_covers and all(
        p.eq.m == mk for p, mk in zip(plans, ct.m))
    params = rho_parameters(ct) if rej is None else None
    covers, sets = [], []
    for k, p in enumerate(plans):
        entry: dict = {"index": p.index, "conductor": p.eq.conductor}
        gr = good_reduction_check(p, p.eq)
        entry["good_reduction"] = gr
        checks[f"good_reduction_{p.index}"] = gr["pass"]
        try:
            bs = branch_points(p)
        except RootsCollide as exc:
            entry["branch_points"] = {"error": str(exc)}
            checks[f"branch_points_{p.index}"] = False
            covers.append(entry)
            continue
        sets.append(bs)
        checks[f"branch_points_{p.index}"] = len(bs) == p.eq.conductor
        entry["branch_points"] = {"count": len(bs), "roots": [x.to_json() for x in bs.roots]}
        hz = hurwitz_sum_check(bs)
        entry["metric_sums"] = hz
        checks[f"metric_sums_{p.index}"] = hz["pass"]
        if params is not None:
            try:
                t = tree_build([bs], ctx)
                exp = expected_cover_tree(params, k)
                entry["tree"] = t.to_json()
                checks[f"cover_tree_{p.index}"] = t.canon() == exp.canon()
            except UltrametricViolated as exc:
                entry["tree"] = {"error": str(exc)}
                checks[f"cover_tree_{p.index}"] = False
        covers.append(entry)
    joint: dict = {}
    if len(sets) == len(plans) and params is not None:
        ic = intersection_counts(sets, ctx, params.rho_vals())
        joint["intersections"] = ic
        checks["intersections"] = ic["pass"]
        try:
            t = tree_build(sets, ctx)
            exp = expected_joint_tree(ct)
            joint["tree"] = t.to_json()
            joint["expected_tree"] = exp.to_json()
            joint["census"] = group_census(joint_points(sets, ctx), ct.n_covers)
            checks["census"] = all(joint["census"][k] == v for k, v in expected_census(ct).items())
            checks["joint_tree"] = t.canon() == exp.canon()
            checks["tree_depths"] = t.depths() == exp.depths()
        except UltrametricViolated as exc:
            joint["tree"] = {"error": str(exc)}
            checks["joint_tree"] = False
        if ct.n_covers == 3:
            th = thickness_solution(ct)
            joint["thickness"] = th.report()
            checks["thickness_identities"] = all(th.identities().values())
    else:
        checks["intersections"] = False
        checks["joint_tree"] = False
    return {"covers": covers, "joint": joint,
            "checks": {k: ("pass" if v else "fail") for k, v in checks.items()},
            "verdict": "pass" if all(checks.values()) else "fail"}


def certify(run_input: dict, con: Construction, log: Optional[list] = None) -> dict:
    ct, ctx = con.ct, con.ctx
    res = verify_plans(ct, ctx, con.plans)
    cert = {
        "format": FORMAT,
        "input": run_input,
        "ring": ctx.to_json(),
        "conductor_type": list(ct.m),
        "field_extensions": log or [],
        "independence_surrogate": "F_2-independence of squared leading coefficients within equal-conductor "
        "blocks; the full minimality condition is not checked",
        "rho": {
            "rho0_exponent": str(con.params.rho0_exp),
            "covers": [{"index": c.index, "r": c.r, "s": c.s, "rho_exponent": str(c.rho_exp),
                        "rho1_exponent": None if c.rho1_exp is None else str(c.rho1_exp),
                        "rho2_exponent": None if c.rho2_exp is None else str(c.rho2_exp)}
                       for c in con.params.covers],
        },
        "interpretations": sorted({s for p in con.plans for s in p.interpretations}),
        "perturbations": [g["perturbations"] for g in con.extra.get("groups", [])],
        "plan": [plan_to_json(p) for p in con.plans],
    }
    cert.update(res)
    return cert


def dumps(cert: dict) -> str:
    return json.dumps(cert, sort_keys=True, indent=1) + "\n"


def ring_from_json(obj: dict) -> RingCtx:
    try:
        fobj = obj["field"]
        fld = field_of_degree(int(fobj["d"]))
        if fld.modulus_bits() != fobj["modulus"]:
            raise CertificateFormatError("field modulus does not match the canonical one")
        return RingCtx(fld, int(obj["M"]), int(obj["N_abs"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise CertificateFormatError(f"bad ring description: {exc}") from exc


def verify_certificate(cert: dict) -> dict:
    """Re-run all checks on the plan embedded in a certificate."""
    if cert.get("format") != FORMAT:
        raise CertificateFormatError(f"unknown certificate format {cert.get('format')!r}")
    ctx = ring_from_json(cert["ring"])
    ct = ConductorType([int(x) for x in cert["conductor_type"]])
    try:
        plans = [plan_from_json(ctx, p) for p in cert["plan"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise CertificateFormatError(f"bad plan: {exc}") from exc
    return verify_plans(ct, ctx, plans)

