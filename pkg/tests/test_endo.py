import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracle as O
from sftkms import (
    CylFn,
    NotInRange,
    alpha,
    alpha_inverse,
    alpha_power,
    build_sft,
    cocycle_power,
    degree_N,
    expectation_E,
    full_shift,
    golden_mean,
    index_cocycle_In,
    inner_product_n,
    level_expectation_En,
    quasi_basis,
    raw_sum_T,
    tower_expectation,
    transfer_L,
    watatani_index,
)
from sftkms.sampling import random_cylfn

FULL2 = full_shift(2)
GOLDEN = golden_mean()
LOOPS = build_sft(2, [[1, 0], [0, 1]])
THREE = build_sft(3, [[1, 1, 0], [0, 1, 1], [1, 1, 1]])
ALL = [FULL2, GOLDEN, THREE]

ind = CylFn.indicator


def one(s):
    return CylFn.const(s, 1.0)


def test_alpha_examples():
    assert alpha(one(GOLDEN)).allclose(one(GOLDEN))
    assert np.allclose(alpha(ind(GOLDEN, (1,))).values, [0, 1, 0])
    f = alpha(alpha(ind(FULL2, (0,))))
    assert f.depth == 3
    assert f.at((1, 1, 0)) == 1 and f.at((0, 0, 1)) == 0


def test_degree_examples():
    assert np.allclose(degree_N(FULL2).values, 2)
    assert np.allclose(degree_N(GOLDEN).values, [2, 1])
    assert np.allclose(degree_N(LOOPS).values, 1)


def test_raw_sum_examples():
    assert np.allclose(raw_sum_T(ind(GOLDEN, (0,))).values, 1)
    assert np.allclose(raw_sum_T(one(FULL2)).values, 2)
    assert np.allclose(raw_sum_T(ind(GOLDEN, (1,))).values, [1, 0])


def test_transfer_examples():
    assert transfer_L(one(GOLDEN)).allclose(one(GOLDEN))
    assert np.allclose(transfer_L(ind(FULL2, (0,))).values, 0.5)
    assert np.allclose(transfer_L(ind(GOLDEN, (1,))).values, [0.5, 0])


def test_expectation_examples():
    assert expectation_E(one(GOLDEN)).allclose(one(GOLDEN))
    assert np.allclose(expectation_E(ind(FULL2, (0,))).values, 0.5)
    f = random_cylfn(np.random.default_rng(1), GOLDEN, 3)
    assert expectation_E(alpha(f)).allclose(alpha(f))


def test_tower_examples():
    for n in range(5):
        assert tower_expectation(one(GOLDEN), n).allclose(one(GOLDEN))
    e1 = tower_expectation(ind(FULL2, (0, 0)), 1)
    # exact fractions from the oracle: (1/2, 0, 1/2, 0)
    assert np.allclose(e1.values, [float(v) for v in O.exact_tower_full2().values()])
    f = random_cylfn(np.random.default_rng(2), FULL2, depth=3)
    assert tower_expectation(tower_expectation(f, 1), 2).allclose(tower_expectation(f, 2))


def test_tower_depth_bookkeeping():
    f = random_cylfn(np.random.default_rng(3), GOLDEN, depth=2)
    assert alpha(f).depth == 3
    assert transfer_L(f).depth == 1
    assert transfer_L(ind(GOLDEN, (0,))).depth == 1
    assert tower_expectation(f, 3).depth == 4
    assert tower_expectation(f, 1).depth == 2


def test_level_expectation_examples():
    f = random_cylfn(np.random.default_rng(4), FULL2, 3)
    assert level_expectation_En(alpha(f), 1).allclose(alpha(expectation_E(f)))
    assert level_expectation_En(one(FULL2), 3).allclose(one(FULL2))
    assert np.allclose(level_expectation_En(alpha(ind(FULL2, (0,))), 1).values, 0.5)
    with pytest.raises(NotInRange):
        level_expectation_En(ind(FULL2, (0,)), 1)


def test_alpha_inverse_examples():
    f = random_cylfn(np.random.default_rng(5), GOLDEN, 3)
    assert alpha_inverse(alpha(f)).allclose(f.promote(max(f.depth, 1)))
    assert alpha_inverse(one(GOLDEN)).allclose(one(GOLDEN))
    second = CylFn(FULL2, 2, [1, 0, 1, 0])  # indicator of x1 == 0
    assert np.allclose(alpha_inverse(second).values, ind(FULL2, (0,)).values)
    with pytest.raises(NotInRange):
        alpha_inverse(ind(FULL2, (0,)))
    assert alpha_inverse(alpha_power(f, 3), 3).allclose(f.promote(max(f.depth, 1)))


def test_quasi_basis_examples():
    u0, u1 = quasi_basis(FULL2)
    assert u0.allclose(math.sqrt(2) * ind(FULL2, (0,)))
    assert u1.allclose(math.sqrt(2) * ind(FULL2, (1,)))
    g0 = quasi_basis(GOLDEN).elements[0]
    assert np.allclose(g0.values, [math.sqrt(2), 1, 0])
    f = ind(GOLDEN, (1,))
    assert quasi_basis(GOLDEN).reconstruct(f).allclose(f)
    for u in quasi_basis(THREE):
        assert u.is_real() and u.min_real() >= 0


def test_index_examples():
    assert np.allclose(watatani_index(FULL2).mu.values, 2)
    assert np.allclose(watatani_index(GOLDEN).mu.values, [2, 1, 2])
    assert np.allclose(watatani_index(LOOPS).mu.values, 1)
    mu = watatani_index(THREE).mu
    tab = O.mu([[1, 1, 0], [0, 1, 1], [1, 1, 1]])
    assert all(mu.at(w) == v for w, v in tab.items())


def test_cocycle_examples():
    c = CylFn.const(GOLDEN, 1.7)
    assert cocycle_power(c, 4).allclose(CylFn.const(GOLDEN, 1.7 ** 4))
    f = CylFn(FULL2, 1, [2, 3])
    assert cocycle_power(f, 0).allclose(one(FULL2))
    assert np.allclose(cocycle_power(f, 2).values, [4, 6, 6, 9])


def test_index_cocycle_examples():
    for n in range(5):
        assert index_cocycle_In(FULL2, n).allclose(CylFn.const(FULL2, 2.0 ** n))
    assert index_cocycle_In(GOLDEN, 0).allclose(one(GOLDEN))
    i2 = index_cocycle_In(GOLDEN, 2)
    assert i2.depth == 3
    assert (i2.at((0, 0, 1)), i2.at((0, 1, 0)), i2.at((0, 0, 0))) == (2, 2, 4)
    i3 = index_cocycle_In(GOLDEN, 3)
    for w, v in O.index_In([[1, 1], [1, 0]], 3).items():
        assert i3.at(w) == v


def test_inner_product_examples():
    for n in range(4):
        assert inner_product_n(one(GOLDEN), one(GOLDEN), n).allclose(one(GOLDEN))
    a = random_cylfn(np.random.default_rng(6), GOLDEN, 3)
    assert inner_product_n(a, a, 0).allclose(a.conj() * a)
    assert np.allclose(inner_product_n(ind(FULL2, (0,)), ind(FULL2, (0,)), 1).values, 0.5)


@pytest.mark.parametrize("s", ALL, ids=["full2", "golden", "three"])
def test_against_brute_force_oracle(s):
    trans = [list(r) for r in s.trans]
    rng = np.random.default_rng(7)
    for _ in range(20):
        f = random_cylfn(rng, s, 4)
        if f.depth == 0:
            f = f.promote(1)
        tab = O.table(f)
        for name, mine, ref in [
            ("alpha", alpha(f), O.alpha(trans, tab)),
            ("T", raw_sum_T(f), O.raw_T(trans, tab)),
            ("L", transfer_L(f), O.transfer_L(trans, tab)),
            ("E2", tower_expectation(f, 2), O.tower(trans, tab, 2)),
            ("cocycle3", cocycle_power(f, 3), O.cocycle(trans, tab, 3)),
        ]:
            for w, v in ref.items():
                assert abs(mine.at(w) - v) <= 1e-12 * max(1, abs(v)), (name, w)


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), which=st.integers(0, 2))
def test_transfer_module_identity(seed, which):
    s = ALL[which]
    rng = np.random.default_rng(seed)
    f, g = random_cylfn(rng, s, 5, 1.0), random_cylfn(rng, s, 5, 1.0)
    assert transfer_L(alpha(f) * g).distance(f * transfer_L(g)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(0, 3), m=st.integers(0, 3))
def test_cocycle_additivity(seed, n, m):
    rng = np.random.default_rng(seed)
    f = random_cylfn(rng, GOLDEN, 3, 1.0)
    lhs = cocycle_power(f, n + m)
    rhs = cocycle_power(f, n) * alpha_power(cocycle_power(f, m), n)
    assert lhs.distance(rhs) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(0, 4))
def test_tower_nesting(seed, n):
    rng = np.random.default_rng(seed)
    f = random_cylfn(rng, THREE, 4, 1.0)
    big = tower_expectation(f, n + 1)
    assert tower_expectation(tower_expectation(f, n), n + 1).distance(big) <= 1e-12
    assert tower_expectation(big, n).distance(big) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_quasi_basis_reconstruction_random(seed):
    rng = np.random.default_rng(seed)
    for s in ALL:
        f = random_cylfn(rng, s, 5)
        assert quasi_basis(s).reconstruct(f).distance(f) <= 1e-12 * max(1, f.sup_norm())


def test_expectation_faithful_on_basis():
    from sftkms import basis
    for s in ALL:
        for d in range(5):
            for b in basis(s, d):
                assert expectation_E(b.conj() * b).sup_norm() > 0
