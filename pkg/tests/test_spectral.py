from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twistlab.algebra import AlgebraElement, operator_norm_bounds, random_element, sobolev_norm
from twistlab.errors import CapacityError, DomainError
from twistlab.groups import FreeAbelianGroup, FreeGroup
from twistlab.multipliers import make_theta_cocycle, trivial_multiplier
from twistlab.spectral import (
    certified_algebra_constant,
    extrapolate_root_sequence,
    holder_interpolation_check,
    monotonicity_check,
    power_bound_check,
    spectral_radius,
    weight_sum,
)

Z = FreeAbelianGroup(1)
Z2 = FreeAbelianGroup(2)


def gen_sum(sigma):
    return AlgebraElement(sigma, {x: 1.0 for x in sigma.model.symmetric_generators})


def test_rho_zero_of_adjacency_on_z():
    tr = spectral_radius(gen_sum(trivial_multiplier(Z)), 0.0, 6)
    assert abs(tr.extrapolated - 2.0) < 0.05
    assert tr.complete


def test_rho_of_delta_is_one():
    s = trivial_multiplier(Z)
    tr = spectral_radius(AlgebraElement.delta(s, Z.element((3,))), 1.0, 6)
    assert tr.extrapolated == pytest.approx(1.0, abs=0.05)


def test_spectral_radius_sandwich_twisted():
    s = make_theta_cocycle(2 * np.pi * 0.3, Z2)
    f = gen_sum(s)
    rho = spectral_radius(f, 0.0, 5).extrapolated
    lo, hi = operator_norm_bounds(f, 10)
    assert lo <= rho * 1.05 and rho <= hi * 1.05


def test_extrapolation_recovers_model_limit():
    ns = np.array([1, 2, 4, 8, 16, 32])
    x = np.exp(np.log(3.0) + 0.4 / ns + 0.7 * np.log(ns) / ns)
    rho, fit = extrapolate_root_sequence(ns, x)
    assert rho == pytest.approx(3.0, rel=1e-10)


@given(seed=st.integers(0, 2**32 - 1))
def test_monotonicity(seed):
    s = make_theta_cocycle(0.7, Z2)
    f = random_element(s, 1, np.random.default_rng(seed))
    assert monotonicity_check(f, 0.5, 1.5, 3)["passed"]


@given(seed=st.integers(0, 2**32 - 1), t=st.floats(0.1, 1.9))
def test_holder_interpolation(seed, t):
    f = random_element(trivial_multiplier(FreeGroup(2)), 2, np.random.default_rng(seed))
    lhs, rhs, ok = holder_interpolation_check(f, 2.0, t)
    assert ok and lhs <= rhs * (1 + 1e-12)


def test_holder_equality_cases():
    s = trivial_multiplier(Z2)
    for x in (Z2.identity, Z2.element((2, -1))):
        r = holder_interpolation_check(AlgebraElement.delta(s, x), 3.0, 1.0)
        assert r.lhs == pytest.approx(r.rhs, rel=1e-14)
    with pytest.raises(DomainError):
        holder_interpolation_check(AlgebraElement.unit(s), 1.0, 2.0)


def test_weight_sums_closed_form():
    direct = sum((1 + abs(n)) ** -4.0 for n in range(-200000, 200001))
    assert weight_sum(Z, 2.0) == pytest.approx(direct, rel=1e-9)
    direct2 = sum(4 * m * (1 + m) ** -6.0 for m in range(1, 200000)) + 1
    assert weight_sum(Z2, 3.0) == pytest.approx(direct2, rel=1e-9)
    assert weight_sum(Z, 0.5) == float("inf")


@given(seed=st.integers(0, 2**32 - 1))
def test_certified_constant_bounds_products(seed):
    from twistlab.algebra import convolve

    s = make_theta_cocycle(0.3, Z2)
    rng = np.random.default_rng(seed)
    a, b = random_element(s, 2, rng), random_element(s, 2, rng)
    K = certified_algebra_constant(Z2, 1.5)
    assert sobolev_norm(convolve(a, b), 1.5) <= K * sobolev_norm(a, 1.5) * sobolev_norm(b, 1.5)


def test_power_bound():
    for sigma, t in ((trivial_multiplier(Z), 1.0), (make_theta_cocycle(0.5, Z2), 1.5)):
        res = power_bound_check(gen_sum(sigma), 3.0, t)
        assert res.passed


def test_capacity_error_keeps_partial_trace():
    f = gen_sum(trivial_multiplier(FreeGroup(2)))
    with pytest.raises(CapacityError) as exc:
        spectral_radius(f, 0.0, 12, support_budget=2000)
    assert exc.value.partial is not None and len(exc.value.partial.estimates) >= 2
