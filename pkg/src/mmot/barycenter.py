"""Discrete Wasserstein barycenters from optimal multi-marginal couplings.

The push-forward of an optimal coupling for the pairwise quadratic cost under
the mean map ``B(x) = (1/N) sum_i x_i`` is a barycenter (equal weights) of the
marginals.  Since ``sum_{i<j} |x_i - x_j|^2 = N sum_i |x_i - B(x)|^2``, its
barycenter functional equals ``lp_value / N``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .cost import tensor_from_points
from .errors import DimensionMismatch, InfeasibleCoupling
from .measures import EmpiricalMeasure, Instance, validate
from .simplex import Coupling, Mode, solve_transport, verify_coupling

MERGE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DiscreteBarycenter:
    """Atoms ``points`` (``(K, d)``) with positive ``weights`` summing to one."""

    points: np.ndarray
    weights: np.ndarray
    functional_value: float | Fraction | None = None

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def exact(self) -> bool:
        return self.weights.dtype == object

    def atoms(self) -> list[tuple[np.ndarray, float | Fraction]]:
        return list(zip(self.points, self.weights))


def _as_weighted(nu) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(nu, DiscreteBarycenter):
        return nu.points, nu.weights
    if isinstance(nu, EmpiricalMeasure):
        return nu.points, nu.weights
    raise TypeError(f"expected an EmpiricalMeasure or DiscreteBarycenter, got {type(nu).__name__}")


def _exact_weights(nu) -> list[Fraction]:
    if isinstance(nu, EmpiricalMeasure):
        return [Fraction(1, nu.m)] * nu.m
    return [w if isinstance(w, Fraction) else Fraction(float(w)) for w in nu.weights]


def _exact_array(points: np.ndarray) -> np.ndarray:
    if points.dtype == object:
        return points
    out = np.empty(points.shape, dtype=object)
    for idx, v in np.ndenumerate(points):
        out[idx] = Fraction(float(v))
    return out


def w2_squared(mu, nu, mode: Mode | str = Mode.FLOAT):
    """Squared 2-Wasserstein distance between two finitely supported measures.

    Either argument may be an :class:`EmpiricalMeasure` or a
    :class:`DiscreteBarycenter`; weights on both sides may be non-uniform.
    """
    mode = Mode(mode)
    exact = mode is Mode.EXACT
    p, wp = _as_weighted(mu)
    q, wq = _as_weighted(nu)
    if p.shape[1] != q.shape[1]:
        raise DimensionMismatch(f"measures live in R^{p.shape[1]} and R^{q.shape[1]}")
    if exact:
        p, q = _exact_array(p), _exact_array(q)
        wp, wq = _exact_weights(mu), _exact_weights(nu)
    cost = tensor_from_points([p, q])
    return solve_transport(cost, [list(wp), list(wq)], mode).value


def barycenter_functional(instance: Instance, nu, mode: Mode | str = Mode.FLOAT):
    """``sum_i W_2^2(mu_i, nu)``."""
    validate(instance)
    return sum((w2_squared(mu, nu, mode) for mu in instance.marginals), start=0)


def _merge(means: list[np.ndarray], weights: list, exact: bool):
    atoms: list[np.ndarray] = []
    mass: list = []
    for x, w in zip(means, weights):
        for k, y in enumerate(atoms):
            same = all(a == b for a, b in zip(x, y)) if exact else np.max(np.abs(x - y)) <= MERGE_TOL
            if same:
                mass[k] = mass[k] + w
                break
        else:
            atoms.append(x)
            mass.append(w)
    return atoms, mass


def extract_barycenter(
    instance: Instance,
    coupling: Coupling,
    *,
    evaluate: bool = True,
    feasibility_tol: float = 1e-9,
) -> DiscreteBarycenter:
    """Push ``coupling`` forward under the mean map, merging coincident atoms.

    Exact couplings (``Fraction`` weights) give exact atoms and exact
    merging; float couplings merge atoms within ``1e-9`` per coordinate.
    With ``evaluate`` the barycenter functional is computed as well.
    """
    validate(instance)
    exact = any(isinstance(w, Fraction) for w in coupling.entries.values())
    report = verify_coupling(instance, coupling)
    if not report.feasible(0 if exact else feasibility_tol):
        raise InfeasibleCoupling(f"coupling violates the marginal constraints by {report.max_violation}")
    pts = instance.exact_points() if exact else instance.points
    N = instance.N
    means, weights = [], []
    for alpha in coupling.support():
        s = sum((pts[i, a] for i, a in enumerate(alpha)), start=0)
        means.append(s / N if not exact else np.array([Fraction(v) / N for v in s], dtype=object))
        weights.append(coupling.entries[alpha])
    atoms, mass = _merge(means, weights, exact)
    points = np.array(atoms, dtype=object if exact else np.float64).reshape(len(atoms), instance.d)
    wts = np.array(mass, dtype=object if exact else np.float64)
    bary = DiscreteBarycenter(points, wts)
    if evaluate:
        value = barycenter_functional(instance, bary, Mode.EXACT if exact else Mode.FLOAT)
        bary = DiscreteBarycenter(points, wts, value)
    return bary
