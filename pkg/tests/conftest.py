import functools
import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import pytest
from hypothesis import settings

from twoadic_lift.as_input import ConductorType, default_degree, generate_equations, residue_field_for
from twoadic_lift.construct import construct

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@functools.lru_cache(maxsize=None)
def built(m: tuple, seed: int = 0):
    """Construction for a conductor type with generated coefficients, cached per session."""
    ct = ConductorType(list(m))
    fld = residue_field_for(default_degree(ct))
    eqs = generate_equations(ct, fld, seed)
    return construct(ct, eqs, fld, seed)


@pytest.fixture
def build():
    return built
