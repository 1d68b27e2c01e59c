import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sftkms import (
    CylFn,
    StarElem,
    StarTerm,
    alpha,
    expectation_F_check,
    expectation_G,
    fixed_point_project_P,
    full_shift,
    gauge_gamma,
    gauge_sigma_u,
    gauge_sigma_z,
    golden_mean,
    ground_functional,
    index_cocycle_In,
    redundancy_element_k,
    star_adjoint,
    star_multiply,
    transfer_L,
)
from sftkms.errors import NotPositive, NotUnitary
from sftkms.kms import CylMeasure
from sftkms.sampling import random_cylfn, random_star, random_unitary
from sftkms.star import probe_distance, sigma_i_beta, star_to_span, term_product

FULL2 = full_shift(2)
GOLDEN = golden_mean()
ind = CylFn.indicator


def one(s):
    return CylFn.const(s, 1.0)


def S(s):
    return StarElem.isometry(s)


def single(x):
    assert len(x) == 1
    return x.terms[0]


def test_adjoint_examples():
    t = single(star_adjoint(S(FULL2)))
    assert (t.n, t.m) == (0, 1)
    a = CylFn(FULL2, 1, [2.0, 3.0])
    p = StarElem.term(a, 2, 2, a)
    q = single(p.adjoint())
    assert (q.n, q.m) == (2, 2) and q.a.allclose(a) and q.b.allclose(a)
    b = random_cylfn(np.random.default_rng(0), FULL2, 2)
    r = single(StarElem.term(one(FULL2), 1, 2, b).adjoint())
    assert (r.n, r.m) == (2, 1) and r.a.allclose(b.conj())


def test_multiply_examples():
    t = single(S(FULL2).adjoint() * S(FULL2))
    assert (t.n, t.m) == (0, 0) and (t.a * t.b).allclose(one(FULL2))
    p = StarElem.projection(FULL2, 1)
    t = single(p * p)
    assert (t.n, t.m) == (1, 1) and (t.a * t.b).allclose(one(FULL2))
    h = CylFn(FULL2, 1, [2.0, 3.0])
    t = single(S(FULL2).adjoint() * StarElem.of_function(h) * S(FULL2))
    assert (t.a * t.b).allclose(CylFn.const(FULL2, 2.5))


def test_covariance_relations():
    a = random_cylfn(np.random.default_rng(1), GOLDEN, 3)
    t = single(S(GOLDEN) * StarElem.of_function(a))
    assert (t.n, t.m) == (1, 0) and (t.a * alpha(t.b)).allclose(alpha(a))
    t = single(S(GOLDEN).adjoint() * StarElem.of_function(a) * S(GOLDEN))
    assert (t.a * t.b).allclose(transfer_L(a))


def test_case_rules_agree_at_equal_exponents():
    rng = np.random.default_rng(2)
    for _ in range(50):
        m = int(rng.integers(0, 4))
        p = StarTerm(random_cylfn(rng, GOLDEN, 3, 1.0), int(rng.integers(0, 4)), m,
                     random_cylfn(rng, GOLDEN, 3, 1.0))
        q = StarTerm(random_cylfn(rng, GOLDEN, 3, 1.0), m, int(rng.integers(0, 4)),
                     random_cylfn(rng, GOLDEN, 3, 1.0))
        left = StarElem(GOLDEN, [term_product(p, q, "left")])
        right = StarElem(GOLDEN, [term_product(p, q, "right")])
        probes = [random_star(rng, GOLDEN, 2, 2, 1.0) for _ in range(2)]
        assert probe_distance(left, right, probes) <= 1e-12


def test_rule_outside_its_case_rejected():
    p = StarTerm(one(FULL2), 0, 2, one(FULL2))
    q = StarTerm(one(FULL2), 1, 0, one(FULL2))
    with pytest.raises(ValueError):
        term_product(p, q, "left")


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_associativity_under_expectation(seed):
    rng = np.random.default_rng(seed)
    s = GOLDEN if seed % 2 else FULL2
    x, y, z = (random_star(rng, s, 4, 4, 1.0) for _ in range(3))
    probes = [random_star(rng, s, 2, 2, 1.0)]
    assert probe_distance((x * y) * z, x * (y * z), probes) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_adjoint_reverses_products(seed):
    rng = np.random.default_rng(seed)
    x, y = random_star(rng, GOLDEN, 4, 4, 1.0), random_star(rng, GOLDEN, 4, 4, 1.0)
    assert probe_distance((x * y).adjoint(), y.adjoint() * x.adjoint(), []) <= 1e-12


def test_gauge_u_examples():
    rng = np.random.default_rng(3)
    x = random_star(rng, GOLDEN, 4, 4, terms=2)
    assert probe_distance(gauge_sigma_u(x, one(GOLDEN)), x, []) == 0
    z = complex(np.exp(0.7j))
    t = single(gauge_gamma(S(GOLDEN), z))
    assert t.a.allclose(CylFn.const(GOLDEN, z))
    u = random_unitary(rng, GOLDEN, 2)
    back = gauge_sigma_u(gauge_sigma_u(x, u), u.conj())
    assert all(p.a.allclose(q.a) and p.b.allclose(q.b) for p, q in zip(back.terms, x.terms))
    with pytest.raises(NotUnitary):
        gauge_sigma_u(x, CylFn.const(GOLDEN, 2.0))


def test_gauge_z_examples():
    h = CylFn.const(FULL2, math.e)
    x = random_star(np.random.default_rng(4), FULL2, 4, 4, terms=2)
    assert probe_distance(gauge_sigma_z(x, 0, h), x, []) <= 1e-15
    t = single(gauge_sigma_z(S(FULL2), 0.8j, h))
    assert t.a.allclose(CylFn.const(FULL2, math.exp(-0.8)))
    a = StarElem.of_function(random_cylfn(np.random.default_rng(5), FULL2, 3))
    assert single(sigma_i_beta(a, h, 1.3)).a.allclose(a.terms[0].a)
    with pytest.raises(NotPositive):
        gauge_sigma_z(x, 1.0, CylFn.const(FULL2, -1.0))


def test_fixed_point_examples():
    assert len(fixed_point_project_P(S(GOLDEN))) == 0
    a, b = (random_cylfn(np.random.default_rng(i), GOLDEN) for i in (6, 7))
    x = StarElem.term(a, 1, 1, b)
    assert len(fixed_point_project_P(x)) == 1
    y = random_star(np.random.default_rng(8), GOLDEN, terms=3)
    lhs = fixed_point_project_P(y + StarElem.monomial(GOLDEN, 2, 0))
    assert probe_distance(lhs, fixed_point_project_P(y), []) == 0


def test_expectation_G_examples():
    assert expectation_G(StarElem.projection(FULL2, 2)).allclose(CylFn.const(FULL2, 0.25))
    assert expectation_G(S(FULL2)).sup_norm() == 0
    h = CylFn(FULL2, 1, [2.0, 3.0])
    assert expectation_G(StarElem.projection(FULL2, 1).left(h)).allclose(h / 2)
    rng = np.random.default_rng(9)
    for _ in range(20):
        t = random_star(rng, GOLDEN).terms[0]
        g = expectation_G(StarElem(GOLDEN, [t]))
        if t.n == t.m:
            assert g.allclose(t.a * index_cocycle_In(GOLDEN, t.n).inv() * t.b)
        else:
            assert g.sup_norm() == 0


def test_ground_functional_examples():
    phi = CylMeasure(GOLDEN, [0.6, 0.4], [[0.5, 0.5], [1.0, 0.0]])
    assert ground_functional(StarElem.one(GOLDEN), phi) == 1
    for n, m in [(1, 0), (0, 1), (2, 2)]:
        assert ground_functional(StarElem.monomial(GOLDEN, n, m), phi) == 0
    i0 = ind(GOLDEN, (0,))
    val = ground_functional(StarElem.term(i0, 0, 0, i0), phi)
    assert val == pytest.approx(phi.evaluate(i0))


def test_redundancy_examples():
    k = redundancy_element_k(FULL2)
    for t, j in zip(k.terms, (0, 1)):
        assert t.a.allclose(math.sqrt(2) * ind(FULL2, (j,)))
    t = single(k * S(FULL2))
    assert (t.n, t.m) == (1, 0) and (t.a * alpha(t.b)).allclose(one(FULL2))
    for s in (FULL2, GOLDEN):
        assert expectation_G(redundancy_element_k(s)).allclose(one(s))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_G_positive(seed):
    rng = np.random.default_rng(seed)
    x = random_star(rng, GOLDEN, 4, 4, 1.0, terms=2)
    v = expectation_G(x.adjoint() * x).values
    assert np.all(np.abs(v.imag) <= 1e-10) and v.real.min() >= -1e-10


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_span_picture_agrees_with_G(seed):
    rng = np.random.default_rng(seed)
    x = random_star(rng, GOLDEN, 4, 4, 1.0, terms=3, gauge_fixed=True)
    assert expectation_F_check(star_to_span(x)).distance(expectation_G(x)) <= 1e-12


def test_star_to_span_rejects_off_diagonal():
    with pytest.raises(ValueError):
        star_to_span(S(GOLDEN))


def test_merge_only_exact_matches():
    a = random_cylfn(np.random.default_rng(10), GOLDEN)
    x = StarElem.term(a, 1, 2, one(GOLDEN)) + StarElem.term(a, 1, 2, one(GOLDEN))
    assert len(x) == 1 and x.terms[0].a.allclose(2 * a)
    y = StarElem.term(a, 1, 2, one(GOLDEN)) + StarElem.term(a, 1, 2, 2 * one(GOLDEN))
    assert len(y) == 2
