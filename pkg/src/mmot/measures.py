"""Empirical measures and multi-marginal problem instances.

An empirical measure is a uniform probability measure on an ordered list of
``m`` points in R^d.  Atom order is significant: indices identify atoms in
couplings and assignments, so nothing here ever sorts points.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyMeasure,
    NonFiniteCoordinate,
    SupportSizeMismatch,
)


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Uniform measure on the rows of ``points`` (shape ``(m, d)``)."""

    points: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.points, dtype=np.float64)
        if arr.ndim == 1 and arr.size == 0:
            arr = arr.reshape(0, 0)
        if arr.ndim != 2:
            raise DimensionMismatch(f"points must be an (m, d) array, got shape {arr.shape}")
        object.__setattr__(self, "points", _frozen_array(arr))

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.m, 1.0 / self.m)

    def mean(self) -> np.ndarray:
        return self.points.mean(axis=0)

    def __eq__(self, other):
        if not isinstance(other, EmpiricalMeasure):
            return NotImplemented
        return self.points.shape == other.points.shape and bool(np.all(self.points == other.points))

    def __hash__(self):
        return hash((self.points.shape, self.points.tobytes()))


@dataclass(frozen=True, eq=False)
class Instance:
    """``N`` empirical marginals sharing support size ``m`` and dimension ``d``.

    Construct through :func:`make_instance` (or :func:`validate`) to get the
    consistency checks; the bare constructor only stores the marginals.
    """

    marginals: tuple[EmpiricalMeasure, ...]

    def __post_init__(self):
        object.__setattr__(self, "marginals", tuple(self.marginals))

    @property
    def N(self) -> int:
        return len(self.marginals)

    @property
    def m(self) -> int:
        return self.marginals[0].m

    @property
    def d(self) -> int:
        return self.marginals[0].d

    @property
    def points(self) -> np.ndarray:
        """Stacked coordinates, shape ``(N, m, d)``."""
        return np.stack([mu.points for mu in self.marginals])

    def exact_points(self) -> np.ndarray:
        """Coordinates as an object array of ``Fraction`` (lossless)."""
        pts = self.points
        out = np.empty(pts.shape, dtype=object)
        for idx, v in np.ndenumerate(pts):
            out[idx] = Fraction(float(v))
        return out

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return self.marginals == other.marginals

    def __hash__(self):
        return hash(self.marginals)


@dataclass(frozen=True)
class Moments:
    per_marginal_second_moment: tuple[float, ...]

    @property
    def total(self) -> float:
        return float(sum(self.per_marginal_second_moment))


def validate(instance: Instance) -> Instance:
    """Return ``instance`` unchanged if it is a well-formed problem, else raise."""
    if instance.N < 1:
        raise EmptyMeasure("instance has no marginals")
    for i, mu in enumerate(instance.marginals):
        if mu.m == 0:
            raise EmptyMeasure(f"marginal {i} has no atoms")
        if mu.d == 0:
            raise DimensionMismatch(f"marginal {i} has zero-dimensional points")
        if not np.all(np.isfinite(mu.points)):
            raise NonFiniteCoordinate(f"marginal {i} has a non-finite coordinate")
    ds = {mu.d for mu in instance.marginals}
    if len(ds) > 1:
        raise DimensionMismatch(f"marginals live in different dimensions: {sorted(ds)}")
    ms = {mu.m for mu in instance.marginals}
    if len(ms) > 1:
        raise SupportSizeMismatch(f"marginals have different support sizes: {sorted(ms)}")
    return instance


def make_instance(marginals: Sequence) -> Instance:
    """Build and validate an instance from ``N`` arrays of shape ``(m, d)``.

    Accepts a single ``(N, m, d)`` array as well.
    """
    measures = [mu if isinstance(mu, EmpiricalMeasure) else EmpiricalMeasure(mu) for mu in marginals]
    return validate(Instance(tuple(measures)))


def center(instance: Instance) -> tuple[Instance, list[np.ndarray]]:
    """Shift each marginal to mean zero; return the centered instance and the means."""
    validate(instance)
    means = [mu.mean() for mu in instance.marginals]
    centered = Instance(tuple(EmpiricalMeasure(mu.points - mean) for mu, mean in zip(instance.marginals, means)))
    return centered, means


def moments(instance: Instance) -> Moments:
    validate(instance)
    return Moments(tuple(float(np.mean(np.sum(mu.points**2, axis=1))) for mu in instance.marginals))
