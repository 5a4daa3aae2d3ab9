from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twistlab.algebra import (
    AlgebraElement,
    adjoint_matrix_check,
    compression_matrix,
    convolve,
    gauge_isomorphism,
    is_rapidly_decreasing,
    l1_norm,
    l2_norm,
    norms,
    operator_norm_bounds,
    power,
    random_element,
    sobolev_norm,
    star,
    sup_weighted_norm,
)
from twistlab.errors import DomainError, UnsupportedModelError
from twistlab.groups import FreeAbelianGroup, FreeGroup, SurfaceGroup
from twistlab.multipliers import area_cocycle, coboundary_gauge, make_theta_cocycle, random_gauge, trivial_multiplier
from twistlab.projections import trace

Z = FreeAbelianGroup(1)
Z2 = FreeAbelianGroup(2)
SIGMAS = {
    "Z2-theta": make_theta_cocycle(0.9, Z2),
    "F2": trivial_multiplier(FreeGroup(2)),
    "G2-area": area_cocycle(SurfaceGroup(2), 1.0),
}


def brute_convolve(f, g):
    out = {}
    m, s = f.model, f.sigma
    for x, a in f.coefficients.items():
        for y, b in g.coefficients.items():
            z = m.multiply(x, y)
            out[z] = out.get(z, 0) + a * b * s(x, y)
    return AlgebraElement(s, out)


@pytest.mark.parametrize("name", list(SIGMAS))
def test_convolution_matches_brute_force(name):
    s = SIGMAS[name]
    rng = np.random.default_rng(4)
    f, g = random_element(s, 1, rng), random_element(s, 1, rng)
    assert convolve(f, g).max_abs_diff(brute_convolve(f, g)) < 1e-13


seeds = st.integers(0, 2**32 - 1)


def _triple(s, seed, radius=1):
    rng = np.random.default_rng(seed)
    out = [random_element(s, radius, rng, density=0.6) for _ in range(3)]
    return [x.scale(1 / l1_norm(x)) for x in out]


@pytest.mark.parametrize("name", list(SIGMAS))
@given(seed=seeds)
def test_associativity(name, seed):
    f, g, h = _triple(SIGMAS[name], seed)
    assert convolve(convolve(f, g), h).max_abs_diff(convolve(f, convolve(g, h))) < 1e-12


@pytest.mark.parametrize("name", list(SIGMAS))
@given(seed=seeds)
def test_star_axioms(name, seed):
    f, g, _ = _triple(SIGMAS[name], seed)
    assert star(star(f)).max_abs_diff(f) < 1e-14
    assert star(convolve(f, g)).max_abs_diff(convolve(star(g), star(f))) < 1e-12
    assert l1_norm(star(f)) == pytest.approx(l1_norm(f), rel=1e-14)


@pytest.mark.parametrize("name", list(SIGMAS))
@given(seed=seeds)
def test_l1_submultiplicative(name, seed):
    f, g, _ = _triple(SIGMAS[name], seed)
    assert l1_norm(convolve(f, g)) <= l1_norm(f) * l1_norm(g) * (1 + 1e-12)


@pytest.mark.parametrize("name", list(SIGMAS))
def test_generators_are_unitary(name):
    s = SIGMAS[name]
    one = AlgebraElement.unit(s)
    for x in s.model.symmetric_generators:
        u = AlgebraElement.delta(s, x)
        assert convolve(star(u), u).max_abs_diff(one) < 1e-12
        assert convolve(u, star(u)).max_abs_diff(one) < 1e-12


def test_star_is_operator_adjoint():
    s = SIGMAS["Z2-theta"]
    f = random_element(s, 2, np.random.default_rng(0))
    assert adjoint_matrix_check(f, 3) < 1e-12


@given(seed=seeds)
def test_trace_of_f_star_f_is_l2_norm(seed):
    s = SIGMAS["G2-area"]
    f = random_element(s, 1, np.random.default_rng(seed))
    assert trace(convolve(f, star(f))) == pytest.approx(l2_norm(f) ** 2, rel=1e-12)


def test_norm_examples():
    s = trivial_multiplier(Z)
    f = AlgebraElement(s, {Z.element((1,)): 1.0, Z.element((-1,)): 1.0})
    assert sobolev_norm(f, 1) == pytest.approx(2 * np.sqrt(2), abs=1e-14)
    assert l1_norm(f) == 2 and l2_norm(f) == pytest.approx(np.sqrt(2))
    assert sup_weighted_norm(f, 2) == pytest.approx(4.0)
    rep = norms(f, [0, 1])
    assert rep.sobolev[0.0] == pytest.approx(l2_norm(f))
    with pytest.raises(DomainError):
        norms(f, [-1])


def test_operator_norm_bounds_z():
    s = trivial_multiplier(Z)
    f = AlgebraElement(s, {Z.element((1,)): 1.0, Z.element((-1,)): 1.0})
    lo, hi = operator_norm_bounds(f, 40)
    assert lo >= 1.99 and hi == 2.0


def test_operator_norm_bounds_z2_laplacian():
    s = trivial_multiplier(Z2)
    f = AlgebraElement(s, {x: 1.0 for x in Z2.symmetric_generators})
    lo, hi = operator_norm_bounds(f, 20)
    assert lo >= 3.9 and hi == pytest.approx(4.0)


def test_compression_column_is_convolution_with_delta():
    s = SIGMAS["Z2-theta"]
    f = random_element(s, 1, np.random.default_rng(2))
    ball = Z2.ball(3)
    M = compression_matrix(f, 3).toarray()
    j = 5
    col = convolve(f, AlgebraElement.delta(s, ball[j]))
    for i, x in enumerate(ball):
        assert M[i, j] == pytest.approx(col[x], abs=1e-14)


def test_power_and_unit():
    s = SIGMAS["F2"]
    f = random_element(s, 1, np.random.default_rng(3))
    assert power(f, 1).max_abs_diff(f) == 0
    with pytest.raises(DomainError):
        power(f, 0)
    assert power(f, 3).max_abs_diff(convolve(f, convolve(f, f))) < 1e-12


def test_gauge_isomorphism_is_homomorphism():
    base = SIGMAS["G2-area"]
    gauge = random_gauge(base.model, 11)
    target = coboundary_gauge(base, gauge)
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(100):
        f, g = random_element(base, 1, rng), random_element(base, 1, rng)
        lhs = gauge_isomorphism(convolve(f, g), gauge, target)
        rhs = convolve(gauge_isomorphism(f, gauge, target), gauge_isomorphism(g, gauge, target))
        worst = max(worst, lhs.max_abs_diff(rhs))
    assert worst < 1e-13


def test_element_json_roundtrip():
    s = SIGMAS["Z2-theta"]
    f = random_element(s, 2, np.random.default_rng(6))
    assert AlgebraElement.from_json(s, f.to_json()).max_abs_diff(f) == 0


def test_rapid_decrease_examples():
    assert is_rapidly_decreasing(Z, lambda x: 2.0 ** (-abs(x.word[0]))).rapidly_decreasing
    assert not is_rapidly_decreasing(Z, lambda x: 1 / (1 + abs(x.word[0]))).rapidly_decreasing
    with pytest.raises(UnsupportedModelError):
        is_rapidly_decreasing(FreeGroup(2), lambda x: 1.0)


def test_mixed_algebras_rejected():
    a = AlgebraElement.unit(SIGMAS["Z2-theta"])
    b = AlgebraElement.unit(trivial_multiplier(Z2))
    with pytest.raises(DomainError):
        convolve(a, b)
