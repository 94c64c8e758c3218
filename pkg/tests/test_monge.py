import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from mmot.cost import build_tensor, pairwise_cost
from mmot.errors import EnumerationOverflow, InputError, NotOneDimensional, NotTwoPoint
from mmot.measures import center, make_instance
from mmot.monge import MongeAssignment, assignment_cost, enumerate_mmc, monotone_1d, two_point_monge
from mmot.simplex import solve_lp

from conftest import random_instance


def brute_mmc(inst):
    """Oracle: loop over every permutation tuple, cost via pairwise_cost directly."""
    best = math.inf
    m = inst.m
    for sigmas in itertools.product(itertools.permutations(range(m)), repeat=inst.N - 1):
        c = 0.0
        for k in range(m):
            alpha = (k,) + tuple(s[k] for s in sigmas)
            c += pairwise_cost([inst.points[i, a] for i, a in enumerate(alpha)])
        best = min(best, c / m)
    return best


def test_example_mmc(example1):
    rep = enumerate_mmc(example1)
    assert rep.enumerated == 36
    assert rep.mmc == pytest.approx(68.065, abs=1e-3)
    assert rep.best.tuples() == [(0, 0, 2), (1, 1, 1), (2, 2, 0)]
    assert rep.mmc >= solve_lp(example1).value


def test_example_assignment_cost(example1):
    a = MongeAssignment.from_tuples([(0, 0, 2), (1, 1, 1), (2, 2, 0)])
    t = build_tensor(example1)
    direct = sum(pairwise_cost([example1.points[i, x] for i, x in enumerate(alpha)]) for alpha in a.tuples()) / 3
    assert assignment_cost(example1, t, a) == pytest.approx(direct, rel=1e-14)
    assert assignment_cost(example1, t, a) == pytest.approx(68.065, abs=1e-3)
    # frozen from exact decimal arithmetic on the printed coordinates
    assert assignment_cost(example1, t, a) == pytest.approx(68.064959255, rel=1e-12)


def test_example_mmc_exact(example1):
    rep = enumerate_mmc(example1, build_tensor(example1, exact=True))
    assert isinstance(rep.mmc, Fraction)
    assert rep.best.tuples() == [(0, 0, 2), (1, 1, 1), (2, 2, 0)]


def test_identical_marginals_mmc():
    pts = np.array([[0.0, 1.0], [2.0, -1.0], [3.0, 3.0]])
    inst = make_instance([pts] * 3)
    rep = enumerate_mmc(inst)
    assert rep.mmc == 0
    assert rep.best == MongeAssignment.identity(3, 3)
    assert assignment_cost(inst, None, MongeAssignment.identity(3, 3)) == 0


def test_one_dim_two_points():
    inst = make_instance([[[0.0], [1.0]], [[2.0], [3.0]]])
    rep = enumerate_mmc(inst)
    assert rep.mmc == pytest.approx(4.0)
    assert rep.best.sigmas == ((0, 1),)


def test_lexicographic_tie_break():
    inst = make_instance(np.zeros((3, 3, 2)))
    assert enumerate_mmc(inst).best == MongeAssignment.identity(3, 3)


def test_enumeration_overflow(rng):
    with pytest.raises(EnumerationOverflow):
        enumerate_mmc(random_instance(rng, 3, 6, 1), cap=1000)


@pytest.mark.parametrize("N,m", [(2, 3), (3, 3), (3, 4), (4, 3), (2, 5)])
def test_against_brute_force(rng, N, m):
    for _ in range(5):
        inst = random_instance(rng, N, m, 2)
        assert enumerate_mmc(inst).mmc == pytest.approx(brute_mmc(inst), rel=1e-12)


def test_blocked_enumeration_matches_table(rng):
    from mmot import monge

    inst = random_instance(rng, 3, 4, 2)
    t = build_tensor(inst)
    table = monge._small_index_table(3, 4)
    blocks = np.concatenate([monge._index_block(3, 4, lead) for lead in range(24)])
    np.testing.assert_array_equal(table, blocks)


def test_assignment_validation():
    with pytest.raises(InputError):
        MongeAssignment(((0, 0, 1),))


def test_two_point_one_dim():
    inst = make_instance([[[-1.0], [1.0]], [[-2.0], [2.0]]])
    res = two_point_monge(inst)
    # pair -1 with -2 and 1 with 2: (1 + 1) / 2 = 1; the crossing plan costs 9
    assert res.value == pytest.approx(1.0)
    assert res.assignment.tuples() == [(0, 0), (1, 1)]


def test_two_point_symmetric():
    a = np.array([[-0.5, 2.0], [0.5, -2.0]])
    inst = make_instance([a] * 4)
    res = two_point_monge(inst)
    assert res.value == pytest.approx(0.0, abs=1e-12)
    assert res.assignment == MongeAssignment.identity(4, 2)


def test_two_point_matches_lp(rng):
    for _ in range(20):
        inst = random_instance(rng, 3, 2, 2)
        res = two_point_monge(inst)
        lp = solve_lp(inst).value
        assert abs(res.value - lp) <= 1e-9 * (1 + lp)
        assert assignment_cost(inst, None, res.assignment) == pytest.approx(res.value, rel=1e-12)


def test_two_point_sign_flip(rng):
    for _ in range(20):
        inst = random_instance(rng, 4, 2, 3)
        c, _ = center(inst)
        flipped = make_instance(-c.points)
        assert two_point_monge(flipped).value == pytest.approx(two_point_monge(c).value, rel=1e-12)


def test_two_point_requires_m2(example1):
    with pytest.raises(NotTwoPoint):
        two_point_monge(example1)


def test_monotone_examples():
    inst = make_instance([[[0.0], [1.0]], [[2.0], [3.0]], [[-1.0], [5.0]]])
    a = monotone_1d(inst)
    assert a == MongeAssignment.identity(3, 2)
    assert assignment_cost(inst, None, a) == pytest.approx(solve_lp(inst).value, rel=1e-12)


def test_monotone_unsorted_and_ties():
    inst = make_instance([[[3.0], [1.0], [2.0]], [[0.0], [0.0], [-4.0]], [[7.0], [1.0], [1.0]]])
    a = monotone_1d(inst)
    # first marginal sorted order: atom 1 (1.0), atom 2 (2.0), atom 0 (3.0)
    assert a.sigmas[0][1] == 2 and a.sigmas[0][2] == 0 and a.sigmas[0][0] == 1
    assert assignment_cost(inst, None, a) == pytest.approx(solve_lp(inst).value, rel=1e-12)


def test_monotone_requires_d1(example1):
    with pytest.raises(NotOneDimensional):
        monotone_1d(example1)
