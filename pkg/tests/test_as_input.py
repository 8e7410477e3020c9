import json

import pytest

from twoadic_lift.as_input import (
    ASEquation,
    ConductorType,
    FieldTooSmallForInput,
    InputError,
    default_degree,
    equations_from_bits,
    generate_equations,
    load_input,
    parse_input,
    validate_independence,
    validate_type,
)
from twoadic_lift.residue_field import field


@pytest.mark.parametrize("m", [(3, 3), (3, 5), (7, 9), (1, 1), (3, 3, 3), (3, 5, 7), (3, 7, 11), (7, 7, 7), (11, 13, 13)])
def test_admissible_types(m):
    assert validate_type(ConductorType(list(m))) is None


@pytest.mark.parametrize("m,code", [
    ((5, 7, 9), "divisibility_1"),
    ((1, 3, 5), "divisibility_1"),
    ((3, 4), "odd"),
    ((5, 3), "sorted"),
    ((3,), "n_covers"),
    ((3, 5, 7, 9), "n_covers"),
    ((3, 5, 9), None),
])
def test_rejections(m, code):
    rej = validate_type(ConductorType(list(m)))
    if code is None:
        assert rej is None
    else:
        assert rej is not None and rej.code == code


def test_rejection_message_names_divisibility():
    rej = validate_type(ConductorType([5, 7, 9]))
    assert "4 ∤ m_1+1" in str(rej)


def test_independence_surrogate():
    F = field(3)
    a = ASEquation([F(1), F(0)])
    b = ASEquation([F(1), F(5)])
    c = ASEquation([F(2), F(5)])
    assert validate_independence([a, b]).code == "independence"
    assert validate_independence([a, c]) is None
    # different conductors never interact
    assert validate_independence([a, ASEquation([F(1), F(0), F(0)])]) is None
    # three squares in a 2-dimensional span
    F4 = field(2)
    eqs = [ASEquation([F4(v)]) for v in (1, 2, 3)]
    assert validate_independence(eqs) is not None


def test_equation_shape():
    F = field(2)
    e = ASEquation([F(1), F(2), F(3)])
    assert (e.n, e.m, e.conductor) == (3, 5, 6)
    assert e.to_json() == ["10", "01", "11"]
    with pytest.raises(InputError):
        ASEquation([F(0)])


def test_parse_input_validation():
    ri = parse_input({"n": 2, "m": [3, 5], "coeffs": [["1", "01"], ["1", "0", "11"]], "seed": 4})
    assert ri.d == 2 and ri.seed == 4
    with pytest.raises(InputError):
        parse_input({"n": 3, "m": [3, 5]})
    with pytest.raises(InputError):
        parse_input({"m": [3, 5], "coeffs": [["1"], ["1", "0", "1"]]})
    with pytest.raises(InputError):
        parse_input({"m": "x"})
    with pytest.raises(InputError):
        parse_input([1, 2])
    with pytest.raises(InputError):
        equations_from_bits(field(2), [["101"]])


def test_load_input(tmp_path):
    p = tmp_path / "run.json"
    p.write_text(json.dumps({"m": [3, 5, 7], "seed": 2, "precision_factor": 2}))
    ri = load_input(str(p))
    assert ri.ct.m == [3, 5, 7] and ri.precision_factor == 2


def test_generated_equations_are_deterministic_and_independent():
    ct = ConductorType([7, 7, 7])
    F = field(default_degree(ct))
    e1 = generate_equations(ct, F, 3)
    e2 = generate_equations(ct, F, 3)
    assert [e.to_json() for e in e1] == [e.to_json() for e in e2]
    assert validate_independence(e1) is None
    with pytest.raises(FieldTooSmallForInput):
        generate_equations(ConductorType([3, 3, 3]), field(2), 0)


@pytest.mark.parametrize("m,d", [((3, 5), 3), ((3, 3, 3), 3), ((3, 7, 11), 3), ((7, 9, 15), 3), ((7, 9, 23), 5), ((3, 17), 5)])
def test_default_degree(m, d):
    assert default_degree(ConductorType(list(m))) == d
