"""JSON file formats: instances, couplings, barycenters.

Index tuples are written 1-based in every JSON document so that they read
the same way atoms are numbered in the instance file (first atom = 1).
Coupling and barycenter weights are always written at full precision so a
dumped coupling re-verifies exactly; exact weights are additionally written
as ``"p/q"`` strings.
"""

from __future__ import annotations

import json
import os
from fractions import Fraction
from typing import Any

import numpy as np

from .barycenter import DiscreteBarycenter
from .errors import InputError
from .measures import EmpiricalMeasure, Instance, validate
from .simplex import Coupling


def instance_from_dict(raw: Any) -> Instance:
    if not isinstance(raw, dict) or "marginals" not in raw:
        raise InputError("instance JSON must be an object with a 'marginals' field")
    marginals = raw["marginals"]
    if not isinstance(marginals, list) or not marginals:
        raise InputError("'marginals' must be a non-empty list")
    try:
        measures = [EmpiricalMeasure(np.array(mu, dtype=np.float64)) for mu in marginals]
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed marginal coordinates: {exc}") from exc
    inst = validate(Instance(tuple(measures)))
    for key, actual in (("N", inst.N), ("m", inst.m), ("d", inst.d)):
        if key in raw and raw[key] != actual:
            raise InputError(f"declared {key}={raw[key]} but the marginals give {key}={actual}")
    return inst


def instance_to_dict(instance: Instance) -> dict:
    return {
        "d": instance.d,
        "N": instance.N,
        "m": instance.m,
        "marginals": [mu.points.tolist() for mu in instance.marginals],
    }


def load_instance(path: str | os.PathLike) -> Instance:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc
    return instance_from_dict(raw)


def save_instance(instance: Instance, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(instance), fh, indent=2)
        fh.write("\n")


def _weight_fields(w) -> dict:
    if isinstance(w, Fraction):
        return {"weight": float(w), "weight_exact": str(w)}
    return {"weight": float(w)}


def coupling_to_list(coupling: Coupling) -> list[dict]:
    return [{"tuple": [a + 1 for a in alpha], **_weight_fields(coupling.entries[alpha])} for alpha in coupling.support()]


def coupling_from_list(rows: list[dict], shape: tuple[int, ...]) -> Coupling:
    entries = {}
    for row in rows:
        alpha = tuple(int(a) - 1 for a in row["tuple"])
        if len(alpha) != len(shape) or any(not 0 <= a < s for a, s in zip(alpha, shape)):
            raise InputError(f"tuple {row['tuple']} out of range for shape {shape}")
        w = Fraction(row["weight_exact"]) if "weight_exact" in row else float(row["weight"])
        entries[alpha] = entries.get(alpha, 0) + w
    return Coupling(tuple(shape), entries)


def barycenter_to_dict(bary: DiscreteBarycenter) -> dict:
    atoms = []
    for p, w in zip(bary.points, bary.weights):
        atoms.append({"point": [float(v) for v in p], **_weight_fields(w)})
    value = bary.functional_value
    return {"atoms": atoms, "functional_value": None if value is None else float(value)}


def barycenter_from_dict(raw: dict) -> DiscreteBarycenter:
    pts = np.array([a["point"] for a in raw["atoms"]], dtype=np.float64)
    wts = np.array([a["weight"] for a in raw["atoms"]], dtype=np.float64)
    return DiscreteBarycenter(pts, wts, raw.get("functional_value"))
