"""Deterministic (Monge) couplings.

A Monge coupling of ``N`` uniform ``m``-point marginals is fixed by one
permutation per marginal after the first: atom ``k`` of the first marginal is
sent to atom ``sigma_i[k]`` of marginal ``i``.  There are ``(m!)^(N-1)`` of
them.  Permutations are stored 0-based as tuples.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .cost import CostTensor, build_tensor, pairwise_cost
from .errors import EnumerationOverflow, InputError, NotOneDimensional, NotTwoPoint
from .measures import Instance, center, moments, validate
from .simplex import Coupling

DEFAULT_ENUMERATION_CAP = 10**7


@dataclass(frozen=True)
class MongeAssignment:
    sigmas: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        sigmas = tuple(tuple(int(v) for v in s) for s in self.sigmas)
        object.__setattr__(self, "sigmas", sigmas)
        for s in sigmas:
            if sorted(s) != list(range(len(s))):
                raise InputError(f"{s} is not a permutation")
        if len({len(s) for s in sigmas}) > 1:
            raise InputError("permutations have different lengths")

    @classmethod
    def identity(cls, N: int, m: int) -> "MongeAssignment":
        return cls(tuple(tuple(range(m)) for _ in range(N - 1)))

    @property
    def N(self) -> int:
        return len(self.sigmas) + 1

    @property
    def m(self) -> int:
        return len(self.sigmas[0]) if self.sigmas else 0

    def tuples(self) -> list[tuple[int, ...]]:
        """Index tuples ``(k, sigma_2[k], ..., sigma_N[k])`` for each atom ``k``."""
        return [(k,) + tuple(s[k] for s in self.sigmas) for k in range(self.m)]

    def coupling(self, exact: bool = False) -> Coupling:
        w = Fraction(1, self.m) if exact else 1.0 / self.m
        entries: dict = {}
        for t in self.tuples():
            entries[t] = entries.get(t, 0) + w
        return Coupling((self.m,) * self.N, entries)

    @classmethod
    def from_tuples(cls, tuples) -> "MongeAssignment":
        """Inverse of :meth:`tuples`; the first coordinates must be ``0..m-1`` in some order."""
        tuples = sorted(tuple(t) for t in tuples)
        if [t[0] for t in tuples] != list(range(len(tuples))):
            raise InputError("tuples do not define a map over the first marginal")
        N = len(tuples[0])
        return cls(tuple(tuple(t[i] for t in tuples) for i in range(1, N)))


@dataclass(frozen=True)
class MongeReport:
    best: MongeAssignment
    mmc: float | Fraction
    enumerated: int


def _tensor_for(instance: Instance, tensor: CostTensor | None) -> CostTensor:
    validate(instance)
    return build_tensor(instance) if tensor is None else tensor


def assignment_cost(instance: Instance, tensor: CostTensor | None, a: MongeAssignment):
    """``(1/m) * sum_k cost[k, sigma_2[k], ..., sigma_N[k]]``."""
    tensor = _tensor_for(instance, tensor)
    if a.N != instance.N or a.m != instance.m:
        raise InputError("assignment does not match the instance shape")
    total = sum((tensor.values[t] for t in a.tuples()), start=0)
    if tensor.exact:
        return Fraction(total) / instance.m
    return float(total) / instance.m


@lru_cache(maxsize=16)
def _permutations(m: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(m))), dtype=np.int64)


@lru_cache(maxsize=16)
def _small_index_table(N: int, m: int) -> np.ndarray:
    return _index_block(N, m, None)


def _index_block(N: int, m: int, lead: int | None) -> np.ndarray:
    """Flat tensor indices of every assignment, shape ``(count, m)``.

    Rows are in lexicographic order of ``(sigma_2, ..., sigma_N)``.  With
    ``lead`` set, only assignments whose ``sigma_2`` is permutation number
    ``lead`` are produced.
    """
    perms = _permutations(m)
    strides = [m ** (N - 1 - i) for i in range(N)]
    flat = (np.arange(m) * strides[0])[None, :]
    for i in range(1, N):
        choices = perms[[lead]] if (i == 1 and lead is not None) else perms
        flat = (flat[:, None, :] + choices[None, :, :] * strides[i]).reshape(-1, m)
    return flat


def enumerate_mmc(
    instance: Instance,
    tensor: CostTensor | None = None,
    *,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> MongeReport:
    """Minimal Monge cost by exhaustive enumeration.

    Ties go to the lexicographically smallest ``(sigma_2, ..., sigma_N)``.
    """
    tensor = _tensor_for(instance, tensor)
    N, m = instance.N, instance.m
    count = math.factorial(m) ** (N - 1)
    if count > cap:
        raise EnumerationOverflow(f"(m!)^(N-1) = {count} assignments exceed the cap {cap}")
    if N == 1:
        total = sum(tensor.values.ravel().tolist(), start=0)
        mmc = Fraction(total) / m if tensor.exact else float(total) / m
        return MongeReport(MongeAssignment(()), mmc, 1)
    flat_cost = tensor.values.ravel()
    perms = _permutations(m)
    if count <= 200_000:
        blocks = [(None, _small_index_table(N, m))]
    else:
        blocks = ((lead, _index_block(N, m, lead)) for lead in range(len(perms)))
    best_total = None
    best_row = None
    offset = 0
    for _, idx in blocks:
        totals = flat_cost[idx].sum(axis=1)
        r = int(np.argmin(totals))
        if best_total is None or totals[r] < best_total:
            best_total, best_row = totals[r], offset + r
        offset += len(idx)
    # decode row number -> (sigma_2, ..., sigma_N) in mixed radix m!
    p = len(perms)
    digits = []
    rem = best_row
    for _ in range(N - 1):
        digits.append(rem % p)
        rem //= p
    sigmas = tuple(tuple(int(v) for v in perms[dgt]) for dgt in reversed(digits))
    mmc = Fraction(best_total) / m if tensor.exact else float(best_total) / m
    return MongeReport(MongeAssignment(sigmas), mmc, count)


@dataclass(frozen=True)
class TwoPointResult:
    assignment: MongeAssignment
    value: float
    choice: tuple[int, ...]
    max_norm_sq: float


def two_point_monge(instance: Instance) -> TwoPointResult:
    """Optimal Monge coupling for ``m = 2`` marginals, any ``N`` and ``d``.

    After centering, atom 1 of each marginal is the negative of atom 0.
    Choose one atom per marginal (atom 0 for the first) maximizing
    ``|sum_i x_i|^2``; pair the chosen atoms together and the complementary
    atoms together.  The reported value is the pairwise cost of that plan on
    the original coordinates.
    """
    validate(instance)
    if instance.m != 2:
        raise NotTwoPoint(f"two_point_monge needs m = 2, got m = {instance.m}")
    centered, means = center(instance)
    N = instance.N
    pts = centered.points  # (N, 2, d)
    best_val = -math.inf
    best_choice: tuple[int, ...] = ()
    for rest in itertools.product((0, 1), repeat=N - 1):
        choice = (0,) + rest
        s = sum(pts[i, a] for i, a in enumerate(choice))
        val = float(s @ s)
        if val > best_val:
            best_val, best_choice = val, choice
    sigmas = tuple((0, 1) if a == 0 else (1, 0) for a in best_choice[1:])
    # pairwise = N * sum|y_i|^2 - |sum y_i|^2 on centered points; shifting back adds pairwise(means)
    value = N * moments(centered).total - best_val + pairwise_cost(means)
    return TwoPointResult(MongeAssignment(sigmas), value, best_choice, best_val)


def monotone_1d(instance: Instance) -> MongeAssignment:
    """Match the k-th smallest atoms of every marginal (ties by original index)."""
    validate(instance)
    if instance.d != 1:
        raise NotOneDimensional(f"monotone_1d needs d = 1, got d = {instance.d}")
    orders = [np.argsort(mu.points[:, 0], kind="stable") for mu in instance.marginals]
    sigmas = []
    for order in orders[1:]:
        sigma = np.empty(instance.m, dtype=np.int64)
        sigma[orders[0]] = order
        sigmas.append(tuple(int(v) for v in sigma))
    return MongeAssignment(tuple(sigmas))
