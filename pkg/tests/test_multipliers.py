from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twistlab.errors import DiscretizationError, DomainError, ValidationError
from twistlab.groups import FreeAbelianGroup, FreeGroup, SurfaceGroup
from twistlab.hyperbolic import geodesic_triangle_area, mobius, wrap_angle
from twistlab.multipliers import (
    Phase,
    TableMultiplier,
    area_cocycle,
    coboundary_gauge,
    make_multiplier,
    make_theta_cocycle,
    phase_from_two_form,
    quadratic_gauge,
    random_gauge,
    trivial_multiplier,
    verify_multiplier,
)

Z2 = FreeAbelianGroup(2)
G2 = SurfaceGroup(2)


def test_theta_cocycle_exhaustive_radius_three():
    rep = verify_multiplier(make_theta_cocycle(0.7, Z2), samples=3)
    assert rep.max_residual == 0.0
    assert rep.n_triples == 25**3
    assert rep.passed


def test_theta_cocycle_values():
    s = make_theta_cocycle(0.7, Z2)
    x, y = Z2.element((2, -1)), Z2.element((3, 4))
    assert s(x, y) == pytest.approx(np.exp(-1j * 0.7 * 2 * 4), abs=1e-15)
    assert s(Z2.identity, y) == 1 and s(x, Z2.identity) == 1


def test_zero_theta_is_trivial():
    rep = verify_multiplier(make_theta_cocycle(0.0, Z2), samples=2)
    assert rep.max_residual == 0.0


def test_area_cocycle_random_triples():
    rep = verify_multiplier(area_cocycle(G2, 1.0), samples=2, n_random=500, seed=3)
    assert rep.n_triples >= 500
    assert rep.max_residual < 1e-9


@pytest.mark.parametrize("kappa", [0.3, 1.0])
def test_area_cocycle_matches_gauss_bonnet(kappa):
    s = area_cocycle(G2, kappa)
    ball = G2.ball(2)
    rng = np.random.default_rng(0)
    for _ in range(30):
        x, y = (ball[i] for i in rng.integers(len(ball), size=2))
        z1 = mobius(G2.matrix(x), 0j)
        z2 = mobius(G2.matrix(G2.multiply(x, y)), 0j)
        area = geodesic_triangle_area(0j, z1, z2)
        lam = -np.angle(s(x, y))
        assert abs(wrap_angle(lam - kappa * area)) < 1e-9


def test_coboundaries_are_cocycles():
    for model in (Z2, FreeGroup(2), G2):
        s = coboundary_gauge(trivial_multiplier(model), random_gauge(model, 7))
        assert verify_multiplier(s, samples=1).passed


def test_quadratic_gauge_turns_theta_into_cohomologous_cocycle():
    base = make_theta_cocycle(0.4, Z2)
    s = coboundary_gauge(base, quadratic_gauge(0.4))
    rep = verify_multiplier(s, samples=2)
    assert rep.max_residual < 1e-12


def test_table_multiplier_rejects_non_cocycle():
    F = FreeGroup(1)
    a = F.element([1])
    bad = TableMultiplier(F, {(a, a): np.exp(0.3j)})
    rep = verify_multiplier(bad, samples=1)
    assert not rep.passed
    assert rep.witnesses


def test_make_multiplier_specs():
    assert make_multiplier({"kind": "theta", "theta": 0.25, "scale": "turns"}, Z2).angle == pytest.approx(np.pi / 2)
    with pytest.raises(DomainError):
        make_multiplier({"kind": "area"}, Z2)
    with pytest.raises(ValidationError):
        make_multiplier({"kind": "nonsense"}, Z2)


def test_planar_phase_reproduces_theta_bilinear_form():
    theta = 0.6
    phase = phase_from_two_form(theta, model=Z2, primitive=lambda p: np.stack([np.zeros(p.shape[:-1]), theta * p[..., 0]], -1))
    for g, m in [((1, 0), (0, 1)), ((2, -3), (1, 4)), ((-1, 2), (3, -2))]:
        assert phase.lam(Z2.element(g), Z2.element(m)) == pytest.approx(theta * g[0] * m[1], abs=1e-12)


@given(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), st.tuples(st.integers(-3, 3), st.integers(-3, 3)))
def test_planar_condition_constant(g, m):
    phase = phase_from_two_form(0.8, model=Z2)
    pts = np.random.default_rng(1).normal(size=(6, 2))
    rep = phase.condition_report(Z2.element(g), Z2.element(m), pts)
    assert rep["spread"] < 1e-10
    assert rep["constant"] == pytest.approx(rep["lambda_mu_gamma"], abs=1e-10)


def test_phase_multiplier_is_cocycle():
    s = phase_from_two_form(0.8, model=Z2).multiplier()
    assert verify_multiplier(s, samples=1).passed


def test_disk_phase_closed_form():
    kappa = 0.9
    phase = phase_from_two_form(kappa, model=G2)
    pts = np.array([0.1 + 0.2j, -0.3 + 0.05j, 0.4j])
    for g in G2.ball(1)[1:]:
        a, b = G2.matrix(g)[0]
        j = lambda z: np.conj(b) * z + np.conj(a)
        expected = 2 * kappa * np.angle(j(pts) / j(0j))
        assert np.max(np.abs(phase(g, pts) - expected)) < 1e-9


def test_disk_phase_condition_and_cocycle():
    phase = phase_from_two_form(1.0, model=G2)
    g, m = G2.from_letters([1]), G2.from_letters([2, 3])
    rep = phase.condition_report(g, m, np.array([0.1 + 0.1j, -0.2j, 0.3]))
    assert rep["spread"] < 1e-9
    s = phase.multiplier()
    assert verify_multiplier(s, samples=1, n_random=60, seed=1).passed


def test_phase_quadrature_failure_is_reported():
    bumpy = Phase(Z2, "plane", np.zeros(2), lambda p: np.stack([np.sin(40 * p[..., 1]), np.cos(37 * p[..., 0])], -1),
                  nodes=4, tol=1e-14)
    with pytest.raises(DiscretizationError):
        bumpy(Z2.element((1, 1)), np.array([[3.0, 2.0]]))


def test_nonclosed_form_rejected():
    Z3 = FreeAbelianGroup(3)

    def omega(p):
        x = p[0]
        return np.array([[0, x, 0], [-x, 0, 0], [0, 0, 0.0]])

    with pytest.raises(ValidationError):
        phase_from_two_form(lambda p: np.array([[0, p[2], 0], [-p[2], 0, 0], [0, 0, 0.0]]), model=Z3)
    phase_from_two_form(omega, model=Z3)
