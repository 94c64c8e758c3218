import itertools
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from mmot.cost import build_tensor
from mmot.errors import CertificateInvalid
from mmot.measures import make_instance
from mmot.monge import MongeAssignment
from mmot.simplex import (
    Coupling,
    DualCertificate,
    Mode,
    constraint_system,
    northwest_corner,
    solve_lp,
    solve_transport,
    verify_certificate,
    verify_coupling,
)

from conftest import random_instance

EXAMPLE_SUPPORT = [(0, 0, 2), (0, 1, 1), (1, 0, 0), (1, 1, 2), (2, 2, 0), (2, 2, 1)]


def highs_value(tensor, weights):
    """Independent LP oracle: full (unreduced) equality system solved by HiGHS."""
    shape = tensor.shape
    idx = np.indices(shape).reshape(len(shape), -1)
    rows, rhs = [], []
    for i, w in enumerate(weights):
        for k, wk in enumerate(w):
            rows.append((idx[i] == k).astype(float))
            rhs.append(float(wk))
    res = linprog(np.asarray(tensor, dtype=float).ravel(), A_eq=np.array(rows), b_eq=rhs, method="highs")
    assert res.status == 0
    return res.fun


def test_example_value_and_support(example1):
    sol = solve_lp(example1)
    assert sol.value == pytest.approx(68.027, abs=1e-3)
    assert sol.coupling.support() == EXAMPLE_SUPPORT
    assert all(w == pytest.approx(1 / 6, abs=1e-12) for w in sol.coupling.entries.values())
    assert verify_coupling(example1, sol.coupling).max_violation <= 1e-12


def test_example_exact(example1):
    sol = solve_lp(example1, mode="exact")
    assert sol.mode is Mode.EXACT
    assert isinstance(sol.value, Fraction)
    assert sol.coupling.entries == {a: Fraction(1, 6) for a in EXAMPLE_SUPPORT}
    cert = verify_certificate(build_tensor(example1, exact=True), sol.coupling, sol.certificate, sol.value, tol=0)
    assert cert.ok and cert.duality_gap == 0
    assert cert.min_slack >= 0


def test_example_certificate_independent_scan(example1):
    sol = solve_lp(example1)
    t = build_tensor(example1)
    u = sol.certificate.potentials
    for alpha in itertools.product(range(3), repeat=3):
        s = sum(u[i][a] for i, a in enumerate(alpha))
        assert s <= t[alpha] + 1e-9
        if alpha in sol.coupling.entries:
            assert s == pytest.approx(t[alpha], abs=1e-9)
    dual = sum(np.mean(ui) for ui in u)
    assert dual == pytest.approx(sol.value, abs=1e-9)


def test_identical_marginals():
    pts = np.array([[0.0, 1.0], [2.0, -1.0], [3.0, 3.0]])
    inst = make_instance([pts, pts, pts])
    sol = solve_lp(inst)
    assert sol.value == pytest.approx(0, abs=1e-12)
    zero = DualCertificate(tuple(np.zeros(3) for _ in range(3)), tuple(np.full(3, 1 / 3) for _ in range(3)), 0.0)
    diag = MongeAssignment.identity(3, 3).coupling()
    assert verify_certificate(build_tensor(inst), diag, zero, 0.0).ok


def test_one_dimensional_two_points():
    inst = make_instance([[[0.0], [1.0]], [[2.0], [3.0]]])
    sol = solve_lp(inst)
    # the two vertices: monotone matching costs (4 + 4) / 2 = 4, crossing costs (9 + 1) / 2 = 5
    assert sol.value == pytest.approx(4.0)
    assert sol.coupling.support() == [(0, 0), (1, 1)]


def test_certificate_invalid_guard(example1, monkeypatch):
    from mmot import simplex

    sol = solve_lp(example1)
    t = build_tensor(example1)
    bad = DualCertificate(tuple(u + 100 for u in sol.certificate.potentials), sol.certificate.weights, 0.0)
    report = verify_certificate(t, sol.coupling, bad, sol.value)
    assert not report.feasible
    monkeypatch.setattr(simplex, "extract_dual", lambda *a, **k: bad)
    with pytest.raises(CertificateInvalid):
        simplex.solve_lp(example1)


def test_verify_coupling_flags_negative(example1):
    entries = {(0, 0, 0): -0.1, (1, 1, 1): 1 / 3, (2, 2, 2): 1 / 3, (0, 1, 2): 0.4333333333333333}
    rep = verify_coupling(example1, Coupling((3, 3, 3), entries))
    assert rep.min_weight < 0
    assert not rep.feasible()


def test_monge_couplings_feasible():
    for s2 in itertools.permutations(range(4)):
        a = MongeAssignment((s2, tuple(reversed(s2))))
        assert verify_coupling(make_instance(np.zeros((3, 4, 1))), a.coupling()).feasible()
        assert verify_coupling(make_instance(np.zeros((3, 4, 1))), a.coupling(exact=True)).max_violation == 0


def test_constraint_system_rank():
    for shape in [(3, 3, 3), (2, 5), (4, 2, 3), (2, 2, 2, 2)]:
        A, labels = constraint_system(shape)
        assert A.shape[0] == sum(shape) - len(shape) + 1
        assert np.linalg.matrix_rank(A) == A.shape[0]


def test_northwest_uniform_is_identity_monge():
    w = [[Fraction(1, 4)] * 4] * 3
    plan = northwest_corner(w, exact=True)
    assert [a for a, _ in plan] == [(k, k, k) for k in range(4)]


@pytest.mark.parametrize("N,m,d", [(3, 3, 2), (2, 4, 2), (3, 4, 3), (4, 3, 2), (5, 2, 3)])
def test_against_highs(rng, N, m, d):
    for _ in range(15):
        inst = random_instance(rng, N, m, d)
        t = build_tensor(inst)
        sol = solve_lp(inst, t)
        ref = highs_value(t.values, [[1 / m] * m] * N)
        assert sol.value == pytest.approx(ref, rel=1e-9, abs=1e-9)
        assert sol.support_size <= N * (m - 1) + 1
        assert sol.coupling.cost(t) == pytest.approx(sol.value, rel=1e-10)
        assert verify_coupling(inst, sol.coupling).feasible(1e-12)


def test_weighted_transport_against_highs(rng):
    for _ in range(20):
        p = rng.normal(size=(4, 2))
        q = rng.normal(size=(6, 2))
        wq = rng.dirichlet(np.ones(6))
        cost = ((p[:, None, :] - q[None, :, :]) ** 2).sum(-1)
        sol = solve_transport(cost, [[0.25] * 4, list(wq)])
        assert sol.value == pytest.approx(highs_value(cost, [[0.25] * 4, wq]), rel=1e-9, abs=1e-12)
        assert sol.support_size <= 4 + 6 - 1


def test_exact_float_agreement(rng):
    for _ in range(20):
        inst = random_instance(rng, 3, 3, 2)
        f = solve_lp(inst).value
        e = solve_lp(inst, mode=Mode.EXACT).value
        assert abs(f - float(e)) <= 1e-8 * (1 + abs(f))


def test_exact_mode_requires_exact_tensor(example1):
    with pytest.raises(ValueError):
        solve_lp(example1, build_tensor(example1), Mode.EXACT)


def test_degenerate_duplicates():
    # many ties: duplicated atoms and identical marginals up to permutation
    pts = np.array([[0.0], [0.0], [1.0], [1.0]])
    inst = make_instance([pts, pts[::-1], pts, pts[[2, 0, 3, 1]]])
    for mode in Mode:
        sol = solve_lp(inst, mode=mode)
        assert sol.value == 0


def test_bland_only_terminates(rng):
    for _ in range(10):
        inst = random_instance(rng, 3, 4, 2)
        a = solve_lp(inst, dantzig_pivots=0)
        b = solve_lp(inst)
        assert a.value == pytest.approx(b.value, rel=1e-10)
