"""Pairwise quadratic cost and its dense tensor.

Two conventions are supported:

``PAIRWISE``
    ``sum_{i<j} |x_i - x_j|^2`` over unordered pairs (pass ``ordered_pairs=True``
    to count every pair twice).
``NEGSUM``
    ``-|sum_i x_i|^2``.

For a tuple of ``N`` points they are related by
``pairwise(x) = N * sum_i |x_i|^2 + negsum(x)``, so over couplings with fixed
marginals the two objectives differ by the constant ``N * moments(inst).total``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, SizeOverflow
from .measures import Instance, validate

DEFAULT_TENSOR_CAP = 10**7


class Convention(str, enum.Enum):
    PAIRWISE = "pairwise"
    NEGSUM = "negsum"


def _as_points(points) -> list[np.ndarray]:
    pts = [np.asarray(p, dtype=np.float64).reshape(-1) for p in points]
    if len({p.shape for p in pts}) > 1:
        raise DimensionMismatch("points have different dimensions")
    return pts


def pairwise_cost(points: Sequence) -> float:
    """``sum_{i<j} |x_i - x_j|^2`` for a list of vectors."""
    pts = _as_points(points)
    total = 0.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            diff = pts[i] - pts[j]
            total += float(diff @ diff)
    return total


def negsum_cost(points: Sequence) -> float:
    """``-|sum_i x_i|^2`` for a list of vectors."""
    pts = _as_points(points)
    s = np.sum(pts, axis=0)
    return -float(s @ s)


@dataclass(frozen=True, eq=False)
class CostTensor:
    """Dense cost array of shape ``(m_1, ..., m_N)``.

    ``values.ravel()`` is the row-major layout with the first index slowest.
    In exact mode ``values`` is an object array of ``Fraction``.
    """

    values: np.ndarray
    convention: Convention = Convention.PAIRWISE
    exact: bool = False

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def N(self) -> int:
        return self.values.ndim

    def __getitem__(self, alpha):
        return self.values[tuple(alpha)]


def _grid(shape: tuple[int, ...], axis: int) -> tuple[int, ...]:
    out = [1] * len(shape)
    out[axis] = shape[axis]
    return tuple(out)


def _sq_dist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.dtype == object:
        diff = a[:, None, :] - b[None, :, :]
        return (diff * diff).sum(axis=2)
    # explicit differences: the a^2 + b^2 - 2ab expansion loses digits
    diff = a[:, None, :] - b[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def tensor_from_points(
    point_sets: Sequence[np.ndarray],
    convention: Convention | str = Convention.PAIRWISE,
    *,
    ordered_pairs: bool = False,
    cap: int = DEFAULT_TENSOR_CAP,
) -> np.ndarray:
    """Cost array over the product of ``point_sets`` (each ``(m_i, d)``).

    Object-dtype inputs (``Fraction`` entries) give an exact object array.
    Support sizes may differ between sets.
    """
    convention = Convention(convention)
    sets = list(point_sets)
    shape = tuple(p.shape[0] for p in sets)
    if len({p.shape[1] for p in sets}) > 1:
        raise DimensionMismatch("point sets have different dimensions")
    if math.prod(shape) > cap:
        raise SizeOverflow(f"cost tensor would have {math.prod(shape)} entries (cap {cap})")
    exact = any(p.dtype == object for p in sets)
    N = len(sets)
    if convention is Convention.PAIRWISE:
        # object zeros are int 0, which promotes cleanly to Fraction
        out = np.zeros(shape, dtype=object if exact else np.float64)
        for i in range(N):
            for j in range(i + 1, N):
                block = _sq_dist(sets[i], sets[j])
                bshape = [1] * N
                bshape[i], bshape[j] = shape[i], shape[j]
                out = out + block.reshape(bshape)
        if ordered_pairs:
            out = out * 2
        return np.broadcast_to(out, shape).copy()
    d = sets[0].shape[1]
    total = np.zeros(shape + (d,), dtype=object if exact else np.float64)
    for i, p in enumerate(sets):
        total = total + p.reshape(_grid(shape, i) + (d,))
    return -(total * total).sum(axis=-1)


def build_tensor(
    instance: Instance,
    convention: Convention | str = Convention.PAIRWISE,
    *,
    exact: bool = False,
    ordered_pairs: bool = False,
    cap: int = DEFAULT_TENSOR_CAP,
) -> CostTensor:
    """Materialize the cost of every index tuple of ``instance``.

    With ``exact=True`` coordinates are converted losslessly to ``Fraction``
    and all entries are exact rationals.
    """
    validate(instance)
    convention = Convention(convention)
    if instance.m**instance.N > cap:
        raise SizeOverflow(f"m^N = {instance.m}^{instance.N} exceeds the tensor cap {cap}")
    pts = instance.exact_points() if exact else instance.points
    values = tensor_from_points(list(pts), convention, ordered_pairs=ordered_pairs, cap=cap)
    if not exact:
        values.setflags(write=False)
    return CostTensor(values, convention, exact)
