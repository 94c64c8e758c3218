import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mmot.cost import Convention, build_tensor, negsum_cost, pairwise_cost
from mmot.errors import DimensionMismatch, SizeOverflow
from mmot.measures import make_instance, moments
from mmot.simplex import solve_lp

from conftest import random_instance

# x^{113} of the three-marginal counterexample; exact decimal oracle: 234704703/12500000
C113 = 18.77637624


def test_pairwise_examples():
    assert pairwise_cost([(0, 0), (3, 4)]) == 25
    assert pairwise_cost([(1.5, 2), (1.5, 2), (1.5, 2)]) == 0
    assert pairwise_cost([(0.4417, -4.7665), (-2.1054, -3.9784), (-1.1644, -2.386)]) == pytest.approx(C113, rel=1e-14)


def test_negsum_examples():
    assert negsum_cost([(1, 0), (-1, 0)]) == 0
    assert negsum_cost([(3, 4)]) == -25
    assert negsum_cost([(1, 0, 0)] * 3) == -9


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        pairwise_cost([(0, 0), (1, 2, 3)])
    with pytest.raises(DimensionMismatch):
        negsum_cost([(0, 0), (1,)])


def test_tensor_small_exhaustive(rng):
    inst = random_instance(rng, 2, 2, 3)
    t = build_tensor(inst)
    assert t.values.size == 4
    for a in itertools.product(range(2), repeat=2):
        assert t[a] == pytest.approx(pairwise_cost([inst.points[i, a[i]] for i in range(2)]), rel=1e-14)


def test_tensor_example(example1):
    t = build_tensor(example1)
    assert t.values.size == 27
    assert t[(0, 0, 2)] == pytest.approx(C113, rel=1e-14)
    flat = t.values.ravel()
    # row-major, first index slowest: (0,0,2) is flat index 2, (1,0,0) is 9
    assert flat[2] == t[(0, 0, 2)] and flat[9] == t[(1, 0, 0)]


def test_tensor_exact_matches_float(example1):
    te = build_tensor(example1, exact=True)
    tf = build_tensor(example1)
    assert isinstance(te[(0, 0, 2)], Fraction)
    np.testing.assert_allclose(np.array(te.values, dtype=float), tf.values, rtol=1e-14)


def test_ordered_pairs_doubles(example1):
    t1 = build_tensor(example1)
    t2 = build_tensor(example1, ordered_pairs=True)
    np.testing.assert_allclose(t2.values, 2 * t1.values)


def test_size_overflow(rng):
    inst = random_instance(rng, 5, 4, 1)
    with pytest.raises(SizeOverflow):
        build_tensor(inst, cap=1000)


def test_negsum_tensor(example1):
    t = build_tensor(example1, Convention.NEGSUM)
    alpha = (2, 1, 0)
    assert t[alpha] == pytest.approx(negsum_cost([example1.points[i, a] for i, a in enumerate(alpha)]), rel=1e-14)


vec_lists = st.integers(1, 5).flatmap(
    lambda N: st.integers(1, 4).flatmap(lambda d: arrays(np.float64, (N, d), elements=st.floats(-100, 100, allow_nan=False)))
)


@settings(max_examples=300, deadline=None)
@given(vec_lists)
def test_cost_identity(x):
    N = len(x)
    lhs = pairwise_cost(x)
    rhs = N * float(np.sum(x**2)) + negsum_cost(x)
    scale = max(1.0, N * float(np.sum(x**2)))
    assert abs(lhs - rhs) <= 1e-12 * scale


def test_conventions_share_argmin(rng):
    for _ in range(30):
        inst = random_instance(rng, 3, 2, 2)
        a = solve_lp(inst, build_tensor(inst))
        b = solve_lp(inst, build_tensor(inst, Convention.NEGSUM))
        S = moments(inst).total
        assert a.value - b.value == pytest.approx(inst.N * S, rel=1e-9)
        assert b.coupling.cost(build_tensor(inst)) == pytest.approx(a.value, rel=1e-9)


def test_translation_invariance_of_support(rng):
    for _ in range(20):
        inst = random_instance(rng, 3, 3, 2)
        shifts = rng.normal(0, 5, (3, 1, 2))
        moved = make_instance(inst.points + shifts)
        a, b = solve_lp(inst), solve_lp(moved)
        # the optimum may not be unique; compare values of each optimal plan under the other cost
        ta, tb = build_tensor(inst), build_tensor(moved)
        assert b.coupling.cost(ta) == pytest.approx(a.value, rel=1e-9)
        assert a.coupling.cost(tb) == pytest.approx(b.value, rel=1e-9)
