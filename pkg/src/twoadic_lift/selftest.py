"""Quick randomized checks runnable without the test dependencies."""
from __future__ import annotations

import random
import sys

from .as_input import ConductorType, default_degree, generate_equations, residue_field_for
from .construct import construct, quartic_identity_expand
from .padic import RingCtx, r_root, r_sqrt, teichmuller
from .poly import mixed_table, recombine_mixed
from .residue_field import field
from .verify import verify_plans


def _report(name: str, ok: bool) -> bool:
    print(f"{'PASS' if ok else 'FAIL'} {name}", file=sys.stderr)
    return ok


def run_selftest(seed: int = 0, trials: int = 20) -> bool:
    rng = random.Random(seed)
    results = []

    F8 = field(3)
    ok = True
    for _ in range(trials):
        x, y, z = (F8(rng.randrange(8)) for _ in range(3))
        ok &= (x * (y + z) == x * y + x * z) and (x * x).sqrt() == x
    results.append(_report("field arithmetic", ok))

    ctx = RingCtx.make(F8, 8)
    ok = True
    for _ in range(trials):
        u = teichmuller(ctx, F8(rng.randrange(1, 8))) + 2 * rng.randrange(1, 50)
        ok &= (r_sqrt(u * u) ** 2).close_to(u * u, 5)
        ok &= (r_root(u, 3) ** 3).close_to(u, 5)
    results.append(_report("ring roots", ok))

    ok = True
    for _ in range(trials):
        a1, a2 = rng.randrange(-50, 50), rng.randrange(-50, 50)
        lhs, rhs = quartic_identity_expand(a1, a2)
        ok &= lhs == rhs
    results.append(_report("quartic identity", ok))

    xs = [teichmuller(ctx, F8(v)) for v in rng.sample(range(1, 8), 3)]
    ok = True
    for ell in range(4):
        al, be, ga = mixed_table(xs[:1], xs[1:]).rows[ell]
        ok &= recombine_mixed(xs[:1], xs[1:], al, be, ga, ell).min_coeff_valuation() >= 5
    results.append(_report("partial fractions", ok))

    for m in ((3, 5), (3, 5, 7)):
        ct = ConductorType(list(m))
        fld = residue_field_for(default_degree(ct))
        con = construct(ct, generate_equations(ct, fld, seed), fld, seed)
        res = verify_plans(ct, con.ctx, con.plans)
        results.append(_report(f"construction {m}", res["verdict"] == "pass"))
    return all(results)
