"""Problem instances: the start point, the action space, the request
sequence, and JSON (de)serialization.

The on-disk format is a single JSON object:

    {
      "dimension": 2,
      "start": [0.0, 0.0],
      "feasible_set": {"type": "whole"}
                    | {"type": "ball", "center": [...], "radius": 1.0}
                    | {"type": "affine", "base": [...], "basis": [[...], ...]}
                    | {"type": "halfspaces", "normals": [[...]], "offsets": [...],
                       "witness": [...]},
      "functions": [
        {"type": "quadratic", "hessian": [[...]] or [diag...], "center": [...],
         "offset": 0.0},
        {"type": "powernorm", "scale": 1.0, "exponent": 2.0, "center": [...],
         "kappa": 1.0},
        {"type": "subspace", "base": [...], "basis": [[...]], "inner": {...}|null}
      ],
      "metadata": {...}
    }

Floats are serialized with full round-trip precision, so save -> load ->
save is byte-stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSet, SchemaError
from .functions import PowerNorm, Quadratic, SubspaceIndicator
from .geometry import (
    AffineSet,
    AffineSubspace,
    Ball,
    FeasibleSet,
    HalfspaceIntersection,
    WholeSpace,
    as_point,
)


@dataclass
class Instance:
    dimension: int
    start: np.ndarray
    feasible: FeasibleSet
    functions: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.start = as_point(self.start)
        if self.start.size != self.dimension:
            raise InvalidSet(
                f"start has dimension {self.start.size}, instance declares {self.dimension}"
            )
        for i, f in enumerate(self.functions):
            if f.dim != self.dimension:
                raise InvalidSet(f"functions[{i}] has dimension {f.dim}, expected {self.dimension}")
        if not self.feasible.contains(self.start, tol=1e-7):
            raise InvalidSet("start point must lie in the feasible set")

    @property
    def horizon(self):
        return len(self.functions)


def _require(payload, key, where):
    if key not in payload:
        raise SchemaError(f"{where}.{key}", "missing required field")
    return payload[key]


def _as_float_list(value, where):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(where, f"expected numeric array: {exc}") from None
    if not np.all(np.isfinite(arr)):
        raise SchemaError(where, "values must be finite")
    return arr


def feasible_to_dict(feasible):
    if isinstance(feasible, WholeSpace):
        return {"type": "whole"}
    if isinstance(feasible, Ball):
        return {"type": "ball", "center": feasible.center.tolist(), "radius": feasible.radius}
    if isinstance(feasible, AffineSet):
        return {
            "type": "affine",
            "base": feasible.subspace.base.tolist(),
            "basis": feasible.subspace.basis.tolist(),
        }
    if isinstance(feasible, HalfspaceIntersection):
        return {
            "type": "halfspaces",
            "normals": feasible.normals.tolist(),
            "offsets": feasible.offsets.tolist(),
            "witness": feasible.witness.tolist(),
        }
    raise SchemaError("feasible_set", f"unknown feasible set {type(feasible).__name__}")


def feasible_from_dict(payload, where="feasible_set"):
    kind = _require(payload, "type", where)
    try:
        if kind == "whole":
            return WholeSpace()
        if kind == "ball":
            return Ball(
                _as_float_list(_require(payload, "center", where), f"{where}.center"),
                float(_require(payload, "radius", where)),
            )
        if kind == "affine":
            base = _as_float_list(_require(payload, "base", where), f"{where}.base")
            basis = _as_float_list(_require(payload, "basis", where), f"{where}.basis")
            return AffineSet(AffineSubspace(base, basis))
        if kind == "halfspaces":
            return HalfspaceIntersection(
                _as_float_list(_require(payload, "normals", where), f"{where}.normals"),
                _as_float_list(_require(payload, "offsets", where), f"{where}.offsets"),
                _as_float_list(_require(payload, "witness", where), f"{where}.witness"),
            )
    except InvalidSet as exc:
        raise SchemaError(where, str(exc)) from None
    raise SchemaError(f"{where}.type", f"unknown feasible set type {kind!r}")


def function_to_dict(f):
    if isinstance(f, Quadratic):
        return {
            "type": "quadratic",
            "hessian": f.hessian.tolist(),
            "center": f.center.tolist(),
            "offset": f.offset,
        }
    if isinstance(f, PowerNorm):
        return {
            "type": "powernorm",
            "scale": f.scale,
            "exponent": f.exponent,
            "center": f.center.tolist(),
            "kappa": f.kappa_declared,
        }
    if isinstance(f, SubspaceIndicator):
        return {
            "type": "subspace",
            "base": f.subspace.base.tolist(),
            "basis": f.subspace.basis.tolist(),
            "inner": None if f.inner is None else function_to_dict(f.inner),
        }
    raise SchemaError("functions", f"cannot serialize {type(f).__name__}")


def function_from_dict(payload, where="functions"):
    kind = _require(payload, "type", where)
    try:
        if kind == "quadratic":
            return Quadratic(
                _as_float_list(_require(payload, "hessian", where), f"{where}.hessian"),
                _as_float_list(_require(payload, "center", where), f"{where}.center"),
                float(payload.get("offset", 0.0)),
            )
        if kind == "powernorm":
            return PowerNorm(
                float(_require(payload, "scale", where)),
                float(_require(payload, "exponent", where)),
                _as_float_list(_require(payload, "center", where), f"{where}.center"),
                float(payload.get("kappa", 1.0)),
            )
        if kind == "subspace":
            base = _as_float_list(_require(payload, "base", where), f"{where}.base")
            basis = _as_float_list(_require(payload, "basis", where), f"{where}.basis")
            inner_payload = payload.get("inner")
            inner = (
                None
                if inner_payload is None
                else function_from_dict(inner_payload, f"{where}.inner")
            )
            if inner is not None and not isinstance(inner, Quadratic):
                raise SchemaError(f"{where}.inner", "inner function must be quadratic")
            return SubspaceIndicator(AffineSubspace(base, basis), inner)
    except InvalidSet as exc:
        raise SchemaError(where, str(exc)) from None
    raise SchemaError(f"{where}.type", f"unknown function type {kind!r}")


def instance_to_dict(instance):
    return {
        "dimension": instance.dimension,
        "start": instance.start.tolist(),
        "feasible_set": feasible_to_dict(instance.feasible),
        "functions": [function_to_dict(f) for f in instance.functions],
        "metadata": instance.metadata,
    }


def instance_from_dict(payload):
    dimension = _require(payload, "dimension", "instance")
    if not isinstance(dimension, int) or dimension < 1:
        raise SchemaError("dimension", "must be a positive integer")
    start = _as_float_list(_require(payload, "start", "instance"), "start")
    feasible = feasible_from_dict(_require(payload, "feasible_set", "instance"))
    raw_functions = _require(payload, "functions", "instance")
    if not isinstance(raw_functions, list):
        raise SchemaError("functions", "must be a list")
    functions = [
        function_from_dict(item, f"functions[{i}]") for i, item in enumerate(raw_functions)
    ]
    metadata = payload.get("metadata", {})
    if not isinstance(metadata, dict):
        raise SchemaError("metadata", "must be an object")
    try:
        return Instance(dimension, start, feasible, functions, metadata)
    except InvalidSet as exc:
        raise SchemaError("instance", str(exc)) from None


def save_instance(instance, path):
    with open(path, "w") as fh:
        json.dump(instance_to_dict(instance), fh, indent=2)
        fh.write("\n")


def load_instance(path):
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError("file", f"not valid JSON: {exc}") from None
    if not isinstance(payload, dict):
        raise SchemaError("file", "top-level value must be an object")
    return instance_from_dict(payload)


# ---------------------------------------------------------------------------
# instance generators used by experiments and the property suites


def random_wellconditioned_instance(rng, d, horizon, kappa, feasible=None, spread=1.0, seed=None):
    """Random quadratic sequence whose condition number is exactly kappa.

    Requires d >= 2 when kappa > 1 (a 1-d quadratic always has kappa 1).
    """
    if kappa > 1 and d < 2:
        raise InvalidSet("kappa > 1 needs dimension >= 2")
    functions = []
    for _ in range(horizon):
        alpha = 10.0 ** rng.uniform(-0.5, 0.5)
        if d == 1:
            eigs = np.array([alpha])
        else:
            eigs = np.concatenate(
                [[alpha, alpha * kappa], rng.uniform(alpha, alpha * kappa, size=d - 2)]
            )
        q = np.linalg.qr(rng.standard_normal((d, d)))[0]
        h = q @ np.diag(eigs) @ q.T
        center = spread * rng.standard_normal(d)
        if feasible is not None and not isinstance(feasible, WholeSpace):
            # keep some minimizers infeasible so constraints actually bind
            if rng.random() < 0.5:
                center = feasible.project(center)
        functions.append(Quadratic(h, center))
    start = spread * rng.standard_normal(d)
    feasible = feasible or WholeSpace()
    start = feasible.project(start)
    meta = {"kappa": kappa}
    if seed is not None:
        meta["seed"] = seed
    return Instance(d, start, feasible, functions, meta)


def random_powernorm_instance(rng, d, horizon, exponent, kappa=1.0, spread=1.0):
    functions = []
    for _ in range(horizon):
        scale = 10.0 ** rng.uniform(-0.5, 0.5)
        center = spread * rng.standard_normal(d)
        functions.append(PowerNorm(scale, exponent, center, kappa))
    start = spread * rng.standard_normal(d)
    return Instance(d, start, WholeSpace(), functions, {"exponent": exponent, "kappa": kappa})


def random_subspace_instance(rng, d, horizon, k, spread=1.0):
    """Requests supported on random k-dimensional affine subspaces with
    zero-minimum quadratic inner costs."""
    functions = []
    for _ in range(horizon):
        basis = np.array(
            [row for row in np.linalg.qr(rng.standard_normal((d, d)))[0].T[:k]]
        )
        base = spread * rng.standard_normal(d)
        eigs = rng.uniform(0.5, 4.0, size=k)
        inner = Quadratic(np.diag(eigs), rng.uniform(-1.0, 1.0, size=k))
        functions.append(SubspaceIndicator(AffineSubspace(base, basis), inner))
    start = spread * rng.standard_normal(d)
    return Instance(d, start, WholeSpace(), functions, {"k": k})


def random_halfspace_set(rng, d, n_halfspaces):
    """Random halfspace intersection with the origin strictly inside."""
    normals = rng.standard_normal((n_halfspaces, d))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    offsets = rng.uniform(0.3, 1.2, size=n_halfspaces)
    return HalfspaceIntersection(normals, offsets, np.zeros(d))


def random_feasible_trajectory(rng, instance, scale=1.0):
    """Random comparator trajectory inside the feasible set, with the
    instance's start as row 0."""
    rows = [instance.start.copy()]
    for _ in range(instance.horizon):
        point = instance.start + scale * rng.standard_normal(instance.dimension)
        rows.append(instance.feasible.project(point))
    return np.array(rows)
