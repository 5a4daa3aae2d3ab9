from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twistlab.algebra import AlgebraElement, convolve, l1_norm, random_element, star
from twistlab.errors import CapacityError, DomainError, ValidationError
from twistlab.groups import FreeAbelianGroup, SurfaceGroup
from twistlab.multipliers import area_cocycle, make_theta_cocycle, phase_from_two_form, random_gauge
from twistlab.algebra import gauge_isomorphism
from twistlab.projections import (
    FunctionAlgebraElement,
    Grid,
    canonical_idempotent,
    cosine_root,
    indicator_root,
    k1_generators,
    rieffel_profiles,
    rieffel_projection,
    trace,
    triangular_root,
)
from twistlab.trace_range import TraceSubgroup, subgroup_membership

Z = FreeAbelianGroup(1)
Z2 = FreeAbelianGroup(2)


def test_grid_shift():
    g = Grid(1, 4, 2)
    a = np.arange(len(g.axis), dtype=float)
    b = g.shift(a, (1,))
    assert b[4] == a[0] and b[:4].sum() == 0


@pytest.mark.parametrize("h", [triangular_root, cosine_root])
def test_canonical_idempotent_on_line(h):
    r = canonical_idempotent(Z, h)
    assert r.residual < 1e-10
    assert r.trace == pytest.approx(1.0, abs=1e-12)


def test_indicator_root_gives_unit_like_projection():
    r = canonical_idempotent(Z, indicator_root)
    assert list(r.element.coefficients) == [Z.identity]
    assert r.residual == 0


def test_canonical_idempotent_plane_with_flux_is_h_independent():
    phase = phase_from_two_form(0.9, model=Z2)
    a = canonical_idempotent(Z2, triangular_root, phase)
    b = canonical_idempotent(Z2, cosine_root, phase)
    assert a.residual < 1e-8 and b.residual < 1e-8
    assert abs(a.trace - b.trace) < 1e-9 and a.trace == pytest.approx(1.0, abs=1e-9)


def test_phase_sign_matters():
    """The conjugate phase does not give an idempotent when the flux is nonzero."""
    phase = phase_from_two_form(0.9, model=Z2)
    good = canonical_idempotent(Z2, triangular_root, phase).element
    flipped = FunctionAlgebraElement({g: np.conj(v) for g, v in good.coefficients.items()}, good.grid, good.sigma)
    assert (flipped * flipped - flipped).max_abs() > 1e-3


def test_partition_violation_reports_point():
    with pytest.raises(ValidationError, match="x ="):
        canonical_idempotent(Z, lambda x: 0.9 * triangular_root(x))


def test_profiles_satisfy_relations():
    theta, eps = 0.3, 0.2
    t = np.linspace(0, 1, 4001)
    f, g = rieffel_profiles(theta, eps, t)
    f_shift, g_shift = rieffel_profiles(theta, eps, t + theta)
    _, g_back = rieffel_profiles(theta, eps, t - theta)
    assert np.max(np.abs(g * g_shift)) == 0
    assert np.max(np.abs(f - f**2 - g**2 - g_back**2)) < 1e-14
    assert np.max(np.abs(g * (f + f_shift) - g)) < 1e-14


@pytest.mark.parametrize("theta", [0.3, 0.5, 0.25])
def test_rieffel_projection(theta):
    r = rieffel_projection(theta)
    assert abs(r.trace - theta) < 1e-9
    assert r.idempotency < 1e-8 and r.selfadjointness < 1e-8
    p = r.projection
    comp = AlgebraElement.unit(p.sigma) - p
    assert trace(p).real + trace(comp).real == pytest.approx(1.0, abs=1e-15)
    S = TraceSubgroup([1.0, theta])
    m = subgroup_membership(r.trace, S)
    assert m.member and m.coefficients == [0, 1]
    assert subgroup_membership(1 - r.trace, S).member


def test_rieffel_errors():
    with pytest.raises(DomainError):
        rieffel_projection(1.2)
    with pytest.raises(CapacityError):
        rieffel_projection(0.3, eps=0.01, samples=256)


def test_trace_basic():
    s = make_theta_cocycle(0.4, Z2)
    assert trace(AlgebraElement.unit(s)) == 1
    assert trace(AlgebraElement.delta(s, Z2.element((1, 0)))) == 0
    u = AlgebraElement.unit(s)
    assert trace([[u, u], [u, u]]) == 2


@given(seed=st.integers(0, 2**32 - 1))
def test_trace_positive_and_gauge_invariant(seed):
    s = area_cocycle(SurfaceGroup(2), 0.6)
    f = random_element(s, 1, np.random.default_rng(seed))
    assert trace(convolve(f, star(f))).real >= 0
    assert trace(gauge_isomorphism(f, random_gauge(s.model, seed % 1000))) == pytest.approx(trace(f), abs=1e-15)


def test_k1_generators():
    k = k1_generators(1)
    assert [u.support()[0].word for u in k.unitaries] == [(1, 0), (0, 1)]
    assert k.unitarity == 0
    k2 = k1_generators(2)
    assert len(k2.unitaries) == 4 and k2.unitarity < 1e-9
    assert all(c["is_scalar_delta"] for c in k2.commutators)
    k3 = k1_generators(1, make_theta_cocycle(0.8, Z2))
    c = k3.commutators[0]
    assert c["is_scalar_delta"] and c["support"] == [[0, 0]]
    with pytest.raises(DomainError):
        k1_generators(0)
