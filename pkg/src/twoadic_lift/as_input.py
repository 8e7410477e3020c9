"""Residue-side data: Artin-Schreier equations and conductor types.

An equation w^2 - w = sum_l a_l^2 / t^(2n-1-2l) is stored by its
coefficient list [a_0, ..., a_{n-1}]; its pole order is m = 2n - 1 and its
conductor 2n.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Optional

from .residue_field import FFElem, FieldCtx, f2_rank
from .residue_field import field as field_of_degree


class InputError(ValueError):
    """Malformed run configuration (a usage problem, not a mathematical one)."""


class FieldTooSmallForInput(ArithmeticError):
    """No admissible coefficients exist over the chosen residue field."""


@dataclass(frozen=True)
class Rejection:
    reason: str
    code: str

    def __str__(self):
        return self.reason


@dataclass
class ASEquation:
    coeffs: list

    def __post_init__(self):
        if not self.coeffs or not self.coeffs[0]:
            raise InputError("leading coefficient a_0 must be nonzero")

    @property
    def n(self) -> int:
        return len(self.coeffs)

    @property
    def m(self) -> int:
        return 2 * self.n - 1

    @property
    def conductor(self) -> int:
        return 2 * self.n

    @property
    def ctx(self) -> FieldCtx:
        return self.coeffs[0].ctx

    def to_json(self) -> list:
        return [c.bits() for c in self.coeffs]

    def embed(self, emb) -> "ASEquation":
        return ASEquation([emb(c) for c in self.coeffs])


@dataclass
class ConductorType:
    m: list = field(default_factory=list)

    @property
    def n_covers(self) -> int:
        return len(self.m)

    def __str__(self):
        return "(" + ",".join(map(str, self.m)) + ")"


def validate_type(ct: ConductorType) -> Optional[Rejection]:
    """None when the type passes the necessary conditions, else a Rejection."""
    m = ct.m
    n = len(m)
    if n not in (2, 3):
        return Rejection(f"only 2 or 3 covers are supported, got {n}", "n_covers")
    for i, mi in enumerate(m):
        if mi < 1 or mi % 2 == 0:
            return Rejection(f"m_{i + 1} = {mi} must be a positive odd integer", "odd")
    if any(a > b for a, b in zip(m, m[1:])):
        return Rejection(f"m = {m} must be non-decreasing", "sorted")
    for i in range(n - 1):
        q = 2 ** (n - 1 - i)
        if (m[i] + 1) % q:
            return Rejection(
                f"{q} does not divide m_{i + 1}+1 = {m[i] + 1} ({q} ∤ m_{i + 1}+1)", f"divisibility_{i + 1}"
            )
    return None


def validate_independence(eqs: list) -> Optional[Rejection]:
    """Within each block of equal conductors the squared leading coefficients must be F_2-independent."""
    blocks: dict = {}
    for k, e in enumerate(eqs):
        blocks.setdefault(e.m, []).append(k)
    for m, idx in sorted(blocks.items()):
        if len(idx) < 2:
            continue
        vecs = [(eqs[k].coeffs[0] * eqs[k].coeffs[0]).value for k in idx]
        if f2_rank(vecs) < len(idx):
            names = ", ".join(f"cover {k + 1}" for k in idx)
            return Rejection(
                f"leading coefficients of {names} (m = {m}) have F_2-dependent squares", "independence"
            )
    return None


# ---------------------------------------------------------------- configuration


@dataclass
class RunInput:
    ct: ConductorType
    d: Optional[int]
    coeffs: Optional[list]  # list of lists of bit strings
    seed: int = 0
    precision_factor: int = 1

    def to_json(self) -> dict:
        out = {"n": self.ct.n_covers, "m": list(self.ct.m), "seed": self.seed,
               "precision_factor": self.precision_factor}
        if self.d is not None:
            out["d"] = self.d
        if self.coeffs is not None:
            out["coeffs"] = self.coeffs
        return out


def parse_input(obj: dict) -> RunInput:
    if not isinstance(obj, dict):
        raise InputError("configuration must be a JSON object")
    try:
        m = [int(x) for x in obj["m"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError("configuration needs an integer list 'm'") from exc
    n = obj.get("n", len(m))
    if n != len(m):
        raise InputError(f"n = {n} but m has {len(m)} entries")
    d = obj.get("d")
    coeffs = obj.get("coeffs")
    if coeffs is not None:
        if len(coeffs) != len(m):
            raise InputError("need one coefficient list per cover")
        for k, (mk, cl) in enumerate(zip(m, coeffs)):
            if len(cl) != (mk + 1) // 2:
                raise InputError(f"cover {k + 1}: expected {(mk + 1) // 2} coefficients, got {len(cl)}")
        if d is None:
            d = max(len(s) for cl in coeffs for s in cl)
    pf = int(obj.get("precision_factor") or 1)
    if pf < 1:
        raise InputError("precision_factor must be >= 1")
    return RunInput(ConductorType(m), None if d is None else int(d), coeffs, int(obj.get("seed", 0)), pf)


def load_input(path: str) -> RunInput:
    with open(path) as fh:
        return parse_input(json.load(fh))


def equations_from_bits(ctx: FieldCtx, coeffs: list) -> list:
    eqs = []
    for cl in coeffs:
        try:
            eqs.append(ASEquation([ctx.from_bits(s) for s in cl]))
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    return eqs


def generate_equations(ct: ConductorType, ctx: FieldCtx, seed: int) -> list:
    """Deterministic random coefficients satisfying the independence surrogate."""
    rng = random.Random(f"coeffs:{seed}:{ctx.d}:{ct}")
    block = max(ct.m.count(x) for x in ct.m)
    if block > ctx.d:
        raise FieldTooSmallForInput(f"{block} independent leading coefficients need d >= {block}")
    for _ in range(1000):
        eqs = []
        for mk in ct.m:
            n = (mk + 1) // 2
            lead = FFElem(ctx, rng.randrange(1, ctx.order))
            rest = [FFElem(ctx, rng.randrange(ctx.order)) for _ in range(n - 1)]
            eqs.append(ASEquation([lead] + rest))
        if validate_independence(eqs) is None:
            return eqs
    raise FieldTooSmallForInput(f"F_2^{ctx.d} is too small for independent leading coefficients")


def default_degree(ct: ConductorType) -> int:
    """Smallest odd d >= 3 leaving room for the seeds and independent leading terms."""
    m = ct.m
    if len(m) == 2:
        seeds = (m[1] + 1) // 2
    else:
        seeds = (m[0] + 1) // 4 + (m[2] - m[0]) // 2
    block = max(m.count(x) for x in m)
    d = 3
    while (1 << d) - 1 < seeds or d < block:
        d += 2
    return d


def residue_field_for(d: int) -> FieldCtx:
    return field_of_degree(d)
