from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twistlab.errors import CapacityError, ConstantsRequiredError, DomainError, ValidationError
from twistlab.trace_range import (
    TraceSubgroup,
    default_c0,
    form,
    pair_top,
    subgroup_membership,
    torus_intersection_form,
    torus_pairings,
    trace_range,
    wedge,
)


def test_wedge_signs():
    a, b = form({(0,): 1.0}), form({(1,): 1.0})
    assert wedge(a, b) == {(0, 1): 1.0}
    assert wedge(b, a) == {(0, 1): -1.0}
    assert wedge(a, a) == {}
    assert form([[2, 1, 3.0]]) == {(1, 2): -3.0}


def test_intersection_form_is_even_unimodular():
    Q = torus_intersection_form()
    assert np.array_equal(Q, Q.T)
    assert round(abs(np.linalg.det(Q))) == 1
    assert np.all(np.diag(Q) == 0)


def test_surface_range():
    S = trace_range({"case": "surface", "theta": 0.3})
    assert S.generators == [1.0, 0.3]


def test_three_torus_range():
    beta = 0.8
    S = trace_range({"case": "3d", "omega": [[1, 2, beta]]})
    c0 = default_c0(3)
    assert S.constants["c0"] == c0
    assert S.raw_generators == [1.0, c0 * beta, 0.0, 0.0]
    assert S.generators == [1.0, c0 * beta]


def test_four_torus_two_flux():
    t12, t34 = 0.37, 0.61
    S = trace_range({"case": "4d", "omega": [[0, 1, t12], [2, 3, t34]]})
    expected = {1.0, 2 * t12 * t34 / (2 * (2 * np.pi) ** 2), t12, t34}
    assert set(v for v in S.raw_generators if v != 0) == expected
    assert set(S.generators) == expected


def test_four_d_with_explicit_q():
    Q = torus_intersection_form().tolist()
    w = [0.37, 0, 0, 0, 0, 0.61]
    S = trace_range({"case": "4d", "Q": Q, "omega": w})
    assert set(S.generators) == set(trace_range({"case": "4d", "omega": [[0, 1, 0.37], [2, 3, 0.61]]}).generators)
    with pytest.raises(ValidationError):
        trace_range({"case": "4d", "Q": [[0, 1], [2, 0]], "omega": [1, 1]})
    with pytest.raises(ValidationError):
        trace_range({"case": "4d", "Q": [[0.5, 1], [1, 0]], "omega": [1, 1]})


def test_general_case_needs_constants():
    spec = {"case": "general", "dimension": 6, "omega_power": 1.0, "pairings": {"1": [0.2], "2": [0.3]}}
    with pytest.raises(ConstantsRequiredError):
        trace_range(spec)
    S = trace_range(spec | {"constants": {"1": [1.0], "2": [0.5]}})
    assert S.raw_generators == [1.0, 1.0 / (2 * (2 * np.pi) ** 3), 0.2, 0.15]


def test_torus_pairings_match_four_d_formula():
    w = form({(0, 1): 0.37, (2, 3): 0.61})
    vals = torus_pairings(w, 4, 1)
    assert sorted(v for v in vals if v) == [0.37, 0.61]
    assert pair_top(wedge(w, w), 4) == pytest.approx(2 * 0.37 * 0.61)


def test_membership_examples():
    assert subgroup_membership(0.9, [1.0, 0.3]).member
    # <1, 0.3> = 0.1 Z, so 0.5 = -1 + 5 * 0.3 is a member; 0.05 is not
    m = subgroup_membership(0.5, [1.0, 0.3], 10)
    assert m.member and m.coefficients == [-1, 5]
    miss = subgroup_membership(0.05, [1.0, 0.3], 10)
    assert not miss.member and miss.distance == pytest.approx(0.05)
    assert subgroup_membership(0.0, []).member
    assert not subgroup_membership(0.1, []).member
    with pytest.raises(CapacityError):
        subgroup_membership(0.1, list(range(1, 10)))
    with pytest.raises(DomainError):
        subgroup_membership(0.1, [1.0], 0)


def test_rieffel_closure_pattern():
    theta = 1 / np.sqrt(5)
    S = TraceSubgroup([1.0, theta])
    for x in (0.0, theta, 1 - theta, 1.0, (2 * theta) % 1):
        assert subgroup_membership(x, S).member


@given(st.lists(st.integers(-6, 6), min_size=6, max_size=6))
def test_lattice_membership_finds_planted_relation(coeffs):
    gens = [1.0, np.sqrt(2), np.sqrt(3), np.pi, np.e, np.log(2)]
    x = float(np.dot(coeffs, gens))
    m = subgroup_membership(x, gens, 10)
    assert m.member and m.method == "lattice"
    assert abs(np.dot(m.coefficients, gens) - x) < 1e-9


@given(st.lists(st.integers(-5, 5), min_size=3, max_size=3))
def test_box_membership_finds_planted_relation(coeffs):
    gens = [1.0, np.sqrt(2), np.pi]
    x = float(np.dot(coeffs, gens))
    m = subgroup_membership(x, gens, 5)
    assert m.member and m.coefficients == coeffs


def test_subgroup_json_roundtrip():
    S = trace_range({"case": "surface", "theta": 0.3})
    assert TraceSubgroup.from_dict(S.to_dict()) == S
