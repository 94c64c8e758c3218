"""Solver-wide invariants at the sample sizes they are stated for."""

import numpy as np
import pytest

from mmot.measures import make_instance
from mmot.search import GeneratorConfig, run_search
from mmot.simplex import Mode, solve_lp, verify_coupling


def test_vertex_support_bound():
    rng = np.random.default_rng(100)
    for _ in range(500):
        N, m, d = int(rng.integers(2, 5)), int(rng.integers(2, 5)), int(rng.integers(1, 4))
        inst = make_instance(3 * rng.standard_normal((N, m, d)))
        sol = solve_lp(inst)
        assert sol.support_size <= N * (m - 1) + 1
        assert abs(sol.value - sol.certificate.objective_match) <= 1e-9
        assert verify_coupling(inst, sol.coupling).feasible(1e-12)


def test_exact_float_agreement():
    rng = np.random.default_rng(101)
    for _ in range(100):
        inst = make_instance(3 * rng.standard_normal((3, 3, 2)))
        f = solve_lp(inst).value
        e = solve_lp(inst, mode=Mode.EXACT)
        assert abs(f - float(e.value)) <= 1e-8 * (1 + abs(f))
        assert e.certificate.objective_match == e.value


def test_birkhoff_vertices_are_permutations():
    rng = np.random.default_rng(102)
    for _ in range(200):
        m, d = int(rng.integers(2, 6)), int(rng.integers(1, 4))
        inst = make_instance(3 * rng.standard_normal((2, m, d)))
        sol = solve_lp(inst)
        support = sol.coupling.support()
        assert len(support) == m
        assert sorted(a for a, _ in support) == list(range(m))
        assert sorted(b for _, b in support) == list(range(m))
        assert all(w == pytest.approx(1 / m, abs=1e-12) for w in sol.coupling.entries.values())


@pytest.mark.parametrize("N,m", [(2, 3), (2, 4), (4, 2), (5, 2)])
def test_zero_failure_batches(N, m):
    res = run_search(GeneratorConfig(N=N, m=m, d=3, master_seed=N * 10 + m), 300, workers=1)
    assert res.summary.failures == 0 and res.summary.errors == 0
    assert res.min_margin >= -1e-7
