"""Command line front end.

Exit codes: 0 pass, 1 usage error, 2 mathematical rejection or failed
verification, 3 resource failure (extension cap, precision).
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from .as_input import (
    ConductorType,
    FieldTooSmallForInput,
    InputError,
    RunInput,
    default_degree,
    equations_from_bits,
    generate_equations,
    parse_input,
    residue_field_for,
    validate_independence,
    validate_type,
)
from .construct import (
    ConstructionError,
    ResidueFieldTooSmall,
    construct,
    pick_seed_residues,
    rho_parameters,
    seed_count,
    thickness_solution,
)
from .padic import NeedsFieldExtension, PadicError, ResidueRootMissing
from .residue_field import ff_extend
from .verify import CertificateFormatError, certify, dumps, verify_certificate

VERBOSE = False


def diag(msg: str, *args, verbose_only: bool = False) -> None:
    """Diagnostics go to standard error; the certificate goes to the output path."""
    if verbose_only and not VERBOSE:
        return
    print(msg % args if args else msg, file=sys.stderr)

EXIT_PASS, EXIT_USAGE, EXIT_REJECT, EXIT_RESOURCE = 0, 1, 2, 3
MAX_EXTENSIONS = 4


class ResourceFailure(RuntimeError):
    pass


def _parse_m(text: str) -> list:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as exc:
        raise InputError(f"--m expects comma separated integers, got {text!r}") from exc


def _parse_coeffs(text: str) -> list:
    """'1,01;11,0,1' -> [['1', '01'], ['11', '0', '1']]"""
    return [[b for b in part.split(",") if b] for part in text.split(";")]


def build_run_input(args) -> RunInput:
    obj: dict = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            obj = json.load(fh)
    if args.m is not None:
        obj["m"] = _parse_m(args.m)
        obj.pop("n", None)
    if getattr(args, "d", None) is not None:
        obj["d"] = args.d
    if getattr(args, "coeffs", None) is not None:
        obj["coeffs"] = _parse_coeffs(args.coeffs)
    if getattr(args, "seed", None) is not None:
        obj["seed"] = args.seed
    if getattr(args, "precision_factor", None) is not None:
        obj["precision_factor"] = args.precision_factor
    if "m" not in obj:
        raise InputError("no conductor type given (use --m or --config)")
    return parse_input(obj)


def run_construction(ri: RunInput):
    """Validate, construct and certify; extends the residue field on demand.

    Returns the certificate dict.  Raises InputError, ConstructionError (as a
    rejection) or ResourceFailure.
    """
    ct = ri.ct
    rej = validate_type(ct)
    if rej is not None:
        raise ConstructionError(str(rej))
    d = ri.d if ri.d is not None else default_degree(ct)
    fld = residue_field_for(d)
    history: list = []

    def extend(exc: Exception, factor: int):
        nonlocal fld
        if len(history) >= MAX_EXTENSIONS:
            raise ResourceFailure(f"residue field extension cap ({MAX_EXTENSIONS}) reached: {exc}") from exc
        big, emb = ff_extend(fld, factor)
        history.append({"from_d": fld.d, "to_d": big.d, "reason": type(exc).__name__, "detail": str(exc)})
        diag("extending residue field F_2^%d -> F_2^%d (%s)", fld.d, big.d, type(exc).__name__,
             verbose_only=True)
        fld = big
        return emb

    # equations: given ones are embedded on extension, generated ones are redrawn
    while True:
        try:
            eqs = equations_from_bits(fld, ri.coeffs) if ri.coeffs is not None else \
                generate_equations(ct, fld, ri.seed)
            break
        except FieldTooSmallForInput as exc:
            extend(exc, 2)
    rej = validate_independence(eqs)
    if rej is not None:
        raise ConstructionError(str(rej))
    residues = None
    while True:
        try:
            if residues is None:
                residues = pick_seed_residues(seed_count(ct), fld, ri.seed)
            con = construct(ct, eqs, fld, ri.seed, ri.precision_factor, seed_residues=residues)
            break
        except ResidueFieldTooSmall as exc:
            emb = extend(exc, 2)
            eqs = [e.embed(emb) for e in eqs]
        except (NeedsFieldExtension, ResidueRootMissing) as exc:
            # keep all residue data: the obstruction disappears in the bigger field
            emb = extend(exc, 3 if isinstance(exc, ResidueRootMissing) else 2)
            eqs = [e.embed(emb) for e in eqs]
            residues = [emb(r) for r in residues]
        except PadicError as exc:
            raise ResourceFailure(f"{type(exc).__name__}: {exc}") from exc
    echo = ri.to_json()
    echo["final_d"] = fld.d
    return certify(echo, con, history)


def _write(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_construct(args) -> int:
    ri = build_run_input(args)
    try:
        cert = run_construction(ri)
    except ResourceFailure as exc:
        diag("error: resource failure: %s", exc)
        return EXIT_RESOURCE
    except ConstructionError as exc:
        diag("error: rejected: %s", exc)
        return EXIT_REJECT
    _write(dumps(cert), args.out)
    failed = [k for k, v in cert["checks"].items() if v != "pass"]
    if failed:
        diag("error: verdict fail: %s", ", ".join(failed))
        return EXIT_REJECT
    diag("verdict pass (d = %d)", cert["input"]["final_d"], verbose_only=True)
    return EXIT_PASS


def cmd_verify(args) -> int:
    try:
        with open(args.certificate) as fh:
            cert = json.load(fh)
        res = verify_certificate(cert)
    except (OSError, json.JSONDecodeError, CertificateFormatError) as exc:
        diag("error: cannot read certificate: %s", exc)
        return EXIT_USAGE
    except PadicError as exc:
        diag("error: verification ran out of precision: %s", exc)
        return EXIT_RESOURCE
    failed = [k for k, v in res["checks"].items() if v != "pass"]
    for name in failed:
        print(f"FAIL {name}", file=sys.stderr)
    if args.out:
        _write(dumps(res), args.out)
    print(f"verdict {res['verdict']}")
    return EXIT_PASS if res["verdict"] == "pass" else EXIT_REJECT


def cmd_thicknesses(args) -> int:
    ct = ConductorType(_parse_m(args.m))
    rej = validate_type(ct)
    if rej is not None:
        diag("error: rejected: %s", rej)
        return EXIT_REJECT
    if ct.n_covers != 3:
        params = rho_parameters(ct)
        print(f"eps0 = {params.rho0_exp}")
        for c in params.covers:
            print(f"cover {c.index}: v(rho) = {c.rho_exp}")
        return EXIT_PASS
    th = thickness_solution(ct)
    print(f"m = {th.m}")
    for name in ("eps0", "eps1", "eps12", "eps23"):
        print(f"{name} = {getattr(th, name)}")
    print(f"eps1~ = {th.eps1_sat}")
    print(f"eps23~ = {th.eps23_sat}")
    print("varrho exponents = " + ", ".join(str(v) for v in th.rho_exps))
    params = rho_parameters(ct)
    for c in params.covers:
        print(f"cover {c.index}: v(rho1) = {c.rho1_exp}, v(rho2) = {c.rho2_exp}, v(rho) = {c.rho_exp}")
    rep = th.report()["eps1_tilde_comparison"]
    print(f"eps1~ against v(rho1^2 rho3) - eps0 = {rep['v(rho1^2 rho3) - eps0']}: "
          f"difference {rep['closed_form_minus_that']}")
    bad = [k for k, ok in th.identities().items() if not ok]
    if bad:
        diag("error: identities failed: %s", ", ".join(bad))
        return EXIT_REJECT
    return EXIT_PASS


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    ok = run_selftest(seed=args.seed or 0, trials=args.trials)
    return EXIT_PASS if ok else EXIT_REJECT


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="twoadic-lift", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build, verify and write a certificate")
    c.add_argument("--config", help="JSON run configuration (flags override its fields)")
    c.add_argument("--m", help="conductor type, e.g. 3,5,7")
    c.add_argument("--d", type=int, help="initial residue degree")
    c.add_argument("--coeffs", help="coefficient bit strings, covers separated by ';', e.g. '1,01;11,0,1'")
    c.add_argument("--seed", type=int)
    c.add_argument("--precision-factor", type=int, dest="precision_factor")
    c.add_argument("--out", default="certificate.json", help="certificate path ('-' for stdout)")
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", help="re-check the plan stored in a certificate")
    v.add_argument("certificate")
    v.add_argument("--out", help="write the fresh check report here")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("thicknesses", help="print thickness values and rho exponents")
    t.add_argument("--m", required=True)
    t.set_defaults(func=cmd_thicknesses)

    s = sub.add_parser("selftest", help="run the built-in property checks")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=int, default=20)
    s.set_defaults(func=cmd_selftest)
    return p


def run(argv: Optional[list] = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    global VERBOSE
    VERBOSE = args.verbose
    try:
        return args.func(args)
    except InputError as exc:
        diag("error: usage: %s", exc)
        return EXIT_USAGE
    except OSError as exc:
        diag("error: %s", exc)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
