import copy
import json
from fractions import Fraction

import pytest

from conftest import built
from twoadic_lift.padic import RElem
from twoadic_lift.verify import (
    FORMAT,
    CertificateFormatError,
    RootsCollide,
    UltrametricViolated,
    branch_points,
    certify,
    check_ultrametric,
    cluster,
    dumps,
    expected_joint_tree,
    good_reduction_check,
    hurwitz_sum_check,
    intersection_counts,
    leaf,
    node,
    normalize,
    plan_from_json,
    plan_to_json,
    tree_build,
    verify_certificate,
)

F = Fraction


@pytest.mark.parametrize("m", [(3, 5), (3, 3, 3)])
def test_good_reduction_passes(m):
    con = built(m)
    for plan in con.plans:
        rep = good_reduction_check(plan, plan.eq)
        assert rep["pass"] and rep["residual"] == "0"


def test_good_reduction_locates_fault():
    con = built((3, 5))
    plan = copy.copy(con.plans[1])
    coeffs = list(plan.f.coeffs)
    coeffs[2] = coeffs[2] + 1  # a digit at level 0
    plan.f = type(plan.f)(con.ctx, coeffs)
    rep = good_reduction_check(plan, plan.eq)
    assert not rep["pass"]
    assert rep["worst_coefficient"] == {"index": 2, "valuation": "0"}


def test_branch_counts():
    con = built((3, 7, 11))
    assert [len(branch_points(p)) for p in con.plans] == [4, 8, 12]


def test_branch_points_detect_wrong_roots():
    con = built((3, 5))
    plan = copy.copy(con.plans[0])
    plan.factors = [list(f) for f in plan.factors]
    plan.factors[0][1] = plan.factors[0][1] + 2
    with pytest.raises(RootsCollide):
        branch_points(plan)


def test_intersections_example():
    con = built((3, 7, 11))
    sets = [branch_points(p) for p in con.plans]
    table = intersection_counts(sets, con.ctx, con.params.rho_vals())["table"]
    assert {k: v["count"] for k, v in table.items()} == {
        "1": 4, "2": 8, "3": 12, "12": 2, "13": 2, "23": 4, "123": 1}
    con = built((3, 5))
    sets = [branch_points(p) for p in con.plans]
    assert intersection_counts(sets, con.ctx, con.params.rho_vals())["table"]["12"]["count"] == 2


def test_metric_sum_decomposition_n2():
    con = built((3, 5))
    hz = hurwitz_sum_check(branch_points(con.plans[0]))
    assert hz["pass"]
    # partner at 1/5 + 7/5, the other pair at 1/5 each
    assert hz["break_sequences"][0] == [["1/5", 2], ["8/5", 1]]


def test_metric_sum_shared_point_n3():
    con = built((3, 5, 7))
    hz = hurwitz_sum_check(branch_points(con.plans[2]))
    assert set(hz["sums"]) == {"2"}
    # the shared center: 7 eps0 + 2 v(varrho_1) + v(varrho_2)
    total = sum(F(d) * k for d, k in hz["break_sequences"][0])
    assert total == 2


def test_ultrametric_violation():
    d = [[None, F(1), F(2)], [F(1), None, F(3)], [F(2), F(3), None]]
    with pytest.raises(UltrametricViolated):
        check_ultrametric(d)
    ok = [[None, F(1), F(1)], [F(1), None, F(3)], [F(1), F(3), None]]
    t = cluster(["a", "b", "c"], ok)
    assert t.canon() == node(1, [leaf("a"), node(3, [leaf("b"), leaf("c")])]).canon()


def test_normalize_merges_levels():
    t = node(1, [node(1, [leaf("a"), leaf("b")]), node(2, [leaf("c")])])
    assert normalize(t).canon() == node(1, [leaf("a"), leaf("b"), leaf("c")]).canon()


def test_joint_tree_shape_3_3_3():
    con = built((3, 3, 3))
    t = tree_build([branch_points(p) for p in con.plans], con.ctx)
    # one group of seven points at a single depth beyond the trunk
    assert t.depth == F(1, 6) + F(1, 2) and len(t.children) == 7
    assert t.canon() == expected_joint_tree(con.ct).canon()


def test_cover_tree_3_5_7_cover2():
    con = built((3, 5, 7))
    t = tree_build([branch_points(con.plans[1])], con.ctx)
    e0 = F(1, 16)
    pair = node(e0 + F(11, 16), [leaf("2"), leaf("2")])
    group = node(e0 + F(1, 2), [pair, pair])
    sat = node(e0 + F(27, 16), [leaf("2"), leaf("2")])
    assert t.canon() == node(e0, [group, sat]).canon()


def test_plan_json_round_trip():
    con = built((3, 5, 7))
    for plan in con.plans:
        back = plan_from_json(con.ctx, json.loads(json.dumps(plan_to_json(plan))))
        assert back.f.degree == plan.f.degree
        assert all((a - b).is_zero() for a, b in zip(back.roots(), plan.roots()))


def certificate(m):
    return json.loads(dumps(certify({"m": list(m)}, built(m))))


def test_certificate_verdict_and_reverification():
    cert = certificate((3, 5, 7))
    assert cert["verdict"] == "pass" and cert["format"] == FORMAT
    assert verify_certificate(cert)["verdict"] == "pass"
    assert cert["joint"]["thickness"]["eps1_tilde_comparison"]["closed_form"] == "25/16"


def test_tampered_certificate_fails():
    cert = certificate((3, 5, 7))
    row = cert["plan"][1]["f"][3]["digits"][0]
    row[0] = str(int(row[0]) + 1)
    res = verify_certificate(cert)
    assert res["verdict"] == "fail"
    assert res["checks"]["good_reduction_2"] == "fail"


def test_malformed_certificate():
    with pytest.raises(CertificateFormatError):
        verify_certificate({"format": "other"})
    cert = certificate((3, 5))
    cert["ring"]["field"]["modulus"] = "1011"
    with pytest.raises(CertificateFormatError):
        verify_certificate(cert)
