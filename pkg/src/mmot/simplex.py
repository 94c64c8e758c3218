"""Dense primal simplex over multi-marginal transport polytopes.

The feasible set is the set of nonnegative arrays ``x`` of shape
``(m_1, ..., m_N)`` whose ``i``-th axis marginal equals the weight vector
``w_i``.  One equality row per (marginal, atom) pair is generated; the last
row of every marginal except the first is dropped, which leaves a full-rank
system with ``sum(m_i) - N + 1`` rows.

The solver runs on a full tableau augmented with an identity block, so the
inverse basis (and hence the dual potentials) is always available.  Float
and exact-rational modes share the same code path: exact mode stores
``Fraction`` objects in an object array and uses zero tolerances.

Initial basis: the north-west corner plan (for uniform marginals with equal
support sizes this is the identity Monge coupling ``(k, k, ..., k)``),
completed to a full basis with degenerate columns.  No artificial variables
are needed.  Pivoting uses Dantzig's rule for a configurable number of
iterations and then Bland's rule, which cannot cycle.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .cost import CostTensor, build_tensor
from .errors import CertificateInvalid, Infeasible, IterationLimit, SolverError
from .measures import Instance, validate


class Mode(str, enum.Enum):
    FLOAT = "float"
    EXACT = "exact"


@dataclass(frozen=True)
class Tolerances:
    pivot: float = 1e-10
    feasibility: float = 1e-9
    optimality: float = 1e-9


DEFAULT_TOLERANCES = Tolerances()
DEFAULT_DANTZIG_PIVOTS = 500
DEFAULT_MAX_ITERATIONS = 100_000


@dataclass(frozen=True, eq=False)
class Coupling:
    """Sparse transport plan: positive weights on (0-based) index tuples."""

    shape: tuple[int, ...]
    entries: dict

    def support(self) -> list[tuple[int, ...]]:
        return sorted(self.entries)

    def weight(self, alpha) -> float | Fraction:
        return self.entries.get(tuple(alpha), 0)

    @property
    def total_mass(self):
        return sum(self.entries.values())

    @property
    def N(self) -> int:
        return len(self.shape)

    def marginal(self, i: int) -> list:
        out = [0] * self.shape[i]
        for alpha, w in self.entries.items():
            out[alpha[i]] += w
        return out

    def to_dense(self) -> np.ndarray:
        exact = any(isinstance(w, Fraction) for w in self.entries.values())
        arr = np.zeros(self.shape, dtype=object if exact else np.float64)
        for alpha, w in self.entries.items():
            arr[alpha] = w
        return arr

    def cost(self, tensor: CostTensor | np.ndarray):
        values = tensor.values if isinstance(tensor, CostTensor) else tensor
        return sum((values[alpha] * w for alpha, w in sorted(self.entries.items())), start=0)

    @classmethod
    def from_dense(cls, arr: np.ndarray, threshold: float = 0.0) -> "Coupling":
        entries = {tuple(int(v) for v in idx): w for idx, w in np.ndenumerate(arr) if w > threshold}
        return cls(tuple(arr.shape), entries)

    def __eq__(self, other):
        if not isinstance(other, Coupling):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries


@dataclass(frozen=True, eq=False)
class DualCertificate:
    """Potentials ``u_i(k)`` with ``sum_i u_i(alpha_i) <= c[alpha]`` everywhere."""

    potentials: tuple[np.ndarray, ...]
    weights: tuple[np.ndarray, ...]
    objective_match: float | Fraction

    def dual_value(self):
        return sum((sum((w * u for w, u in zip(wi, ui)), start=0) for wi, ui in zip(self.weights, self.potentials)), start=0)

    def potential_sum(self) -> np.ndarray:
        """``sum_i u_i(alpha_i)`` broadcast over all index tuples."""
        shape = tuple(len(u) for u in self.potentials)
        N = len(shape)
        total = np.zeros(shape, dtype=self.potentials[0].dtype)
        for i, u in enumerate(self.potentials):
            bshape = [1] * N
            bshape[i] = shape[i]
            total = total + u.reshape(bshape)
        return total


@dataclass(frozen=True)
class CertificateReport:
    min_slack: float | Fraction
    max_complementary_violation: float | Fraction
    duality_gap: float | Fraction
    feasible: bool
    complementary: bool
    strong_duality: bool

    @property
    def ok(self) -> bool:
        return self.feasible and self.complementary and self.strong_duality


@dataclass(frozen=True, eq=False)
class LPSolution:
    coupling: Coupling
    value: float | Fraction
    certificate: DualCertificate
    iterations: int
    mode: Mode
    basis: tuple[int, ...] = field(default=())

    @property
    def support_size(self) -> int:
        return len(self.coupling.entries)


@dataclass(frozen=True)
class CouplingReport:
    min_weight: float | Fraction
    mass_error: float | Fraction
    max_marginal_violation: float | Fraction

    @property
    def max_violation(self):
        return max(-self.min_weight if self.min_weight < 0 else 0, abs(self.mass_error), self.max_marginal_violation)

    def feasible(self, tol: float = 1e-12) -> bool:
        return self.max_violation <= tol


@lru_cache(maxsize=64)
def constraint_system(shape: tuple[int, ...]) -> tuple[np.ndarray, tuple[tuple[int, int], ...]]:
    """Reduced equality system for the transport polytope of ``shape``.

    Returns the 0/1 matrix (rows x prod(shape)) and the (marginal, atom) label
    of each row.
    """
    n = math.prod(shape)
    idx = np.indices(shape).reshape(len(shape), n)
    rows = []
    labels = []
    for i, mi in enumerate(shape):
        last = mi if i == 0 else mi - 1
        for k in range(last):
            rows.append(idx[i] == k)
            labels.append((i, k))
    A = np.array(rows, dtype=np.float64).reshape(len(rows), n)
    A.setflags(write=False)
    return A, tuple(labels)


def northwest_corner(weights: Sequence[Sequence], exact: bool = False, eps: float = 1e-12) -> list[tuple[tuple[int, ...], object]]:
    """Greedy staircase plan; returns ``[(alpha, mass), ...]``."""
    N = len(weights)
    idx = [0] * N
    rem = [weights[i][0] for i in range(N)]
    tol = 0 if exact else eps
    plan = []
    while True:
        amount = min(rem)
        plan.append((tuple(idx), amount))
        done = False
        for i in range(N):
            rem[i] -= amount
            if rem[i] <= tol:
                idx[i] += 1
                if idx[i] == len(weights[i]):
                    done = True
                else:
                    rem[i] += weights[i][idx[i]]
        if done:
            if any(idx[i] < len(weights[i]) for i in range(N)):
                raise Infeasible("marginal weights do not have equal total mass")
            return plan


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    return Fraction(float(x))


class _Tableau:
    """Augmented simplex tableau ``[B^-1 A | B^-1 | B^-1 b]`` plus objective row."""

    def __init__(self, A, b, c, exact: bool, tol: Tolerances):
        R, n = A.shape
        self.R, self.n, self.exact, self.tol = R, n, exact, tol
        if exact:
            T = np.empty((R + 1, n + R + 1), dtype=object)
            T[...] = Fraction(0)
            T[:R, :n] = np.vectorize(Fraction, otypes=[object])(A.astype(int))
            for r in range(R):
                T[r, n + r] = Fraction(1)
            T[:R, -1] = [_to_fraction(v) for v in b]
            T[R, :n] = [_to_fraction(v) for v in c]
        else:
            T = np.zeros((R + 1, n + R + 1))
            T[:R, :n] = A
            T[:R, n : n + R] = np.eye(R)
            T[:R, -1] = b
            T[R, :n] = c
        self.T = T
        self.basis = [-1] * R
        self.A, self.b, self.c = A, b, c

    def pivot(self, r: int, j: int) -> None:
        T = self.T
        prow = T[r] / T[r, j]
        col = T[:, j].copy()
        T -= np.outer(col, prow)
        T[r] = prow
        if not self.exact:
            T[:, j] = 0.0
            T[r, j] = 1.0
        self.basis[r] = j

    def install(self, cols: Sequence[int]) -> None:
        """Gauss-Jordan the given independent columns into the basis, then complete it."""
        T, R, n = self.T, self.R, self.n
        zero = 0 if self.exact else self.tol.pivot
        for j in cols:
            free = [r for r in range(R) if self.basis[r] < 0]
            mags = [abs(T[r, j]) for r in free]
            best = max(range(len(free)), key=lambda t: mags[t]) if free else None
            if best is None or mags[best] <= zero:
                raise SolverError(f"initial column {j} is dependent on the partial basis")
            self.pivot(free[best], j)
        for r in range(R):
            if self.basis[r] >= 0:
                continue
            row = np.abs(T[r, :n])
            row[[j for j in self.basis if j >= 0]] = 0
            j = int(np.argmax(row))
            if row[j] <= zero:
                raise SolverError("constraint system is rank deficient")
            self.pivot(r, j)
        rhs = T[:R, -1]
        if self.exact:
            if any(v < 0 for v in rhs):
                raise Infeasible("initial basis is not primal feasible")
        else:
            if np.min(rhs) < -self.tol.feasibility:
                raise Infeasible("initial basis is not primal feasible")
            rhs[rhs < 0] = 0.0

    def entering(self, bland: bool) -> int | None:
        z = self.T[self.R, : self.n]
        thresh = 0 if self.exact else -self.tol.optimality
        if bland:
            neg = np.nonzero(z < thresh)[0]
            return int(neg[0]) if len(neg) else None
        j = int(np.argmin(z))
        return j if z[j] < thresh else None

    def leaving(self, j: int) -> int | None:
        R = self.R
        col = self.T[:R, j]
        rhs = self.T[:R, -1]
        eligible = np.nonzero(col > (0 if self.exact else self.tol.pivot))[0]
        if len(eligible) == 0:
            return None
        ratios = [rhs[r] / col[r] for r in eligible]
        best = min(ratios)
        slack = 0 if self.exact else 1e-12 * (1 + abs(best))
        ties = [r for r, q in zip(eligible, ratios) if q <= best + slack]
        return int(min(ties, key=lambda r: self.basis[r]))

    def refresh(self) -> None:
        """Recompute the float tableau from the current basis to shed drift."""
        R, n = self.R, self.n
        B = self.A[:, self.basis]
        Binv = np.linalg.inv(B)
        y = self.c[self.basis] @ Binv
        T = self.T
        T[:R, :n] = Binv @ self.A
        T[:R, n : n + R] = Binv
        T[:R, -1] = Binv @ self.b
        T[R, :n] = self.c - y @ self.A
        T[R, n : n + R] = -y
        T[R, -1] = -(y @ self.b)
        T[:R, :n][:, self.basis] = np.eye(R)
        T[R, self.basis] = 0.0
        rhs = T[:R, -1]
        rhs[np.abs(rhs) < 1e-13] = 0.0

    def duals(self) -> np.ndarray:
        return -self.T[self.R, self.n : self.n + self.R]

    def primal(self) -> dict[int, object]:
        rhs = self.T[: self.R, -1]
        return {j: rhs[r] for r, j in enumerate(self.basis)}


def solve_transport(
    cost: np.ndarray,
    weights: Sequence[Sequence],
    mode: Mode | str = Mode.FLOAT,
    *,
    tol: Tolerances = DEFAULT_TOLERANCES,
    dantzig_pivots: int = DEFAULT_DANTZIG_PIVOTS,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    verify: bool = True,
) -> LPSolution:
    """Minimize ``<cost, x>`` over couplings with the given marginal weights.

    ``cost`` has shape ``(m_1, ..., m_N)`` and ``weights[i]`` has length
    ``m_i``; all weight vectors must carry the same total mass.  In exact
    mode, weights and costs are converted to ``Fraction`` (floats losslessly).
    """
    mode = Mode(mode)
    exact = mode is Mode.EXACT
    cost = np.asarray(cost)
    shape = tuple(cost.shape)
    if len(weights) != len(shape) or any(len(w) != s for w, s in zip(weights, shape)):
        raise ValueError("weights do not match the cost tensor shape")
    if exact:
        weights = [[_to_fraction(v) for v in w] for w in weights]
        c = np.array([_to_fraction(v) for v in cost.ravel()], dtype=object)
    else:
        weights = [[float(v) for v in w] for w in weights]
        c = np.ascontiguousarray(cost, dtype=np.float64).ravel()
    A, labels = constraint_system(shape)
    b = [weights[i][k] for i, k in labels]
    b = np.array(b, dtype=object) if exact else np.array(b, dtype=np.float64)

    tab = _Tableau(A, b, c, exact, tol)
    start = [int(np.ravel_multi_index(alpha, shape)) for alpha, _ in northwest_corner(weights, exact)]
    tab.install(start)

    iterations = 0
    while True:
        while True:
            j = tab.entering(bland=iterations >= dantzig_pivots)
            if j is None:
                break
            r = tab.leaving(j)
            if r is None:
                raise SolverError("LP reported unbounded over a bounded polytope")
            tab.pivot(r, j)
            iterations += 1
            if iterations > max_iterations:
                raise IterationLimit(f"no optimum after {max_iterations} pivots")
        if exact:
            break
        tab.refresh()
        if tab.entering(bland=True) is None:
            break

    primal = tab.primal()
    threshold = 0 if exact else 1e-13
    entries = {}
    for j, v in sorted(primal.items()):
        if v > threshold:
            alpha = tuple(int(t) for t in np.unravel_index(j, shape))
            entries[alpha] = v if exact else float(v)
    coupling = Coupling(shape, entries)
    cvals = c.reshape(shape)
    value = coupling.cost(cvals)
    if not exact:
        value = float(value)
    certificate = extract_dual(tab.duals(), labels, shape, weights, exact)
    if verify:
        report = verify_certificate(cvals, coupling, certificate, value, tol=0 if exact else tol.feasibility)
        if not report.ok:
            raise CertificateInvalid(f"dual certificate failed verification: {report}")
    return LPSolution(coupling, value, certificate, iterations, mode, tuple(tab.basis))


def extract_dual(y, labels, shape, weights, exact: bool) -> DualCertificate:
    """Map simplex multipliers onto per-marginal potentials (dropped rows get 0)."""
    dtype = object if exact else np.float64
    potentials = []
    for mi in shape:
        u = np.zeros(mi, dtype=dtype)
        if exact:
            u[...] = Fraction(0)
        potentials.append(u)
    for (i, k), v in zip(labels, y):
        potentials[i][k] = v
    wts = tuple(np.array(w, dtype=dtype) for w in weights)
    cert = DualCertificate(tuple(potentials), wts, 0)
    value = cert.dual_value()
    return DualCertificate(tuple(potentials), wts, value if exact else float(value))


def verify_certificate(
    cost: np.ndarray | CostTensor,
    coupling: Coupling,
    certificate: DualCertificate,
    primal_value=None,
    *,
    tol: float = 1e-9,
) -> CertificateReport:
    """Independent scan of dual feasibility, complementary slackness and the duality gap."""
    values = cost.values if isinstance(cost, CostTensor) else np.asarray(cost)
    slack = values - certificate.potential_sum()
    min_slack = slack.min()
    cs = max((abs(slack[alpha]) for alpha in coupling.entries), default=0)
    if primal_value is None:
        primal_value = coupling.cost(values)
    gap = primal_value - certificate.dual_value()
    return CertificateReport(
        min_slack=min_slack,
        max_complementary_violation=cs,
        duality_gap=gap,
        feasible=bool(min_slack >= -tol),
        complementary=bool(cs <= tol),
        strong_duality=bool(abs(gap) <= tol),
    )


def verify_coupling(instance: Instance | Sequence[Sequence], coupling: Coupling) -> CouplingReport:
    """Nonnegativity, total mass and every marginal constraint of ``coupling``.

    ``instance`` may also be a list of marginal weight vectors.
    """
    if isinstance(instance, Instance):
        weights = [[Fraction(1, instance.m) if _is_exact(coupling) else 1.0 / instance.m] * instance.m] * instance.N
    else:
        weights = [list(w) for w in instance]
    if tuple(len(w) for w in weights) != coupling.shape:
        return CouplingReport(0, 0, math.inf)
    min_weight = min(coupling.entries.values(), default=0)
    mass_error = coupling.total_mass - 1
    worst = 0
    for i, w in enumerate(weights):
        marg = coupling.marginal(i)
        worst = max(worst, max(abs(a - b) for a, b in zip(marg, w)))
    return CouplingReport(min_weight, mass_error, worst)


def _is_exact(coupling: Coupling) -> bool:
    return any(isinstance(w, Fraction) for w in coupling.entries.values())


def uniform_weights(instance: Instance, exact: bool = False) -> list[list]:
    w = Fraction(1, instance.m) if exact else 1.0 / instance.m
    return [[w] * instance.m for _ in range(instance.N)]


def solve_lp(
    instance: Instance,
    tensor: CostTensor | None = None,
    mode: Mode | str = Mode.FLOAT,
    **kwargs,
) -> LPSolution:
    """Optimal coupling of the uniform multi-marginal problem.

    ``tensor`` defaults to the pairwise cost; in exact mode it must be an
    exact tensor (or omitted, in which case one is built from the coordinates).
    """
    validate(instance)
    mode = Mode(mode)
    exact = mode is Mode.EXACT
    if tensor is None:
        tensor = build_tensor(instance, exact=exact)
    elif exact and not tensor.exact:
        raise ValueError("exact mode needs an exact cost tensor (build_tensor(..., exact=True))")
    return solve_transport(tensor.values, uniform_weights(instance, exact), mode, **kwargs)
