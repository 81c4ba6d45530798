"""Online dimension reduction for low-dimensional requests.

Requests supported on k-dimensional affine subspaces of R^d are mapped,
online, into a fixed (2k+1)-dimensional coordinate subspace L by an
incrementally composed sequence of affine isometries.  Each new isometry
fixes the image of the previous request pointwise, so consecutive
distances are preserved and any chaser run inside L pulls back to an
equal-cost chaser in the ambient space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, DimensionOverflow, OffSubspace
from .functions import SubspaceIndicator
from .geometry import (
    AffineIsometry,
    AffineSubspace,
    DRIFT_TOL,
    as_point,
    norm,
    orthonormalize,
    rotation_mapping_subspace,
)


@dataclass
class ReductionState:
    k: int
    m: int  # dim(L); L is the span of the first m coordinate axes
    ambient: int
    iso: AffineIsometry  # the current isometry R_t
    prev_image: AffineSubspace  # R_t(K_t), always inside L
    t: int = 1
    start_image: np.ndarray | None = None


def _tail_residual(state_m, subspace):
    parts = [np.abs(subspace.base[state_m:])]
    if subspace.dim:
        parts.append(np.abs(subspace.basis[:, state_m:]).ravel())
    vals = np.concatenate([p.ravel() for p in parts]) if parts else np.zeros(1)
    return float(vals.max()) if vals.size else 0.0


def init_reduction(first_request: AffineSubspace, k, ambient_d):
    """Reduction state whose initial isometry carries the first request
    into the canonical coordinate subspace L (identity when it already
    lies there)."""
    if first_request.dim > k:
        raise DimensionMismatch(
            f"request has dimension {first_request.dim}, declared bound is {k}"
        )
    if first_request.ambient_dim != ambient_d:
        raise DimensionMismatch("request does not live in the declared ambient space")
    m = min(2 * k + 1, ambient_d)
    if _tail_residual(m, first_request) <= 1e-12:
        iso = AffineIsometry.identity(ambient_d)
    else:
        spanning = list(first_request.basis)
        if float(np.linalg.norm(first_request.base)) > 1e-14:
            spanning.append(first_request.base)
        sources = orthonormalize(spanning)
        if len(sources) > m:
            raise DimensionOverflow(
                f"first request spans {len(sources)} linear dimensions, L holds {m}"
            )
        origin = AffineSubspace(np.zeros(ambient_d), np.zeros((0, ambient_d)))
        targets = list(np.eye(ambient_d)[:m])
        iso = rotation_mapping_subspace(origin, sources, targets)
    prev_image = iso.apply_to_subspace(first_request)
    return ReductionState(k=k, m=m, ambient=ambient_d, iso=iso, prev_image=prev_image)


def reduce_request(state, request: AffineSubspace, f=None):
    """Transform the next request into L and advance the state.

    Returns the transformed request (an AffineSubspace inside L) and,
    when an inner function is given, the function transported through the
    new isometry.
    """
    if request.dim > state.k:
        raise DimensionOverflow(
            f"request has dimension {request.dim}, declared bound is {state.k}"
        )
    image = state.iso.apply_to_subspace(request)
    fixed = state.prev_image

    rel = list(image.basis)
    rel.append(image.base - fixed.base)
    fmat = fixed.basis
    residuals = []
    for v in rel:
        u = as_point(v).copy()
        if fmat.shape[0]:
            u -= fmat.T @ (fmat @ u)
            u -= fmat.T @ (fmat @ u)
        residuals.append(u)
    new_dirs = orthonormalize(residuals, tol=1e-9)

    axes = list(np.eye(state.ambient)[: state.m])
    free = orthonormalize(list(fmat) + axes, tol=1e-9)[fmat.shape[0] :]
    if len(new_dirs) > len(free):
        raise DimensionOverflow(
            f"request needs {len(new_dirs)} fresh directions, L has {len(free)} free"
        )

    rho = rotation_mapping_subspace(fixed, new_dirs, free)
    iso = rho.compose(state.iso)
    if iso.gram_residual() > DRIFT_TOL:
        iso = iso.renormalized()
    state.iso = iso
    state.t += 1

    transformed = iso.apply_to_subspace(request)
    transformed = AffineSubspace.from_spanning(transformed.base, list(transformed.basis))
    if _tail_residual(state.m, transformed) > 1e-8:
        raise DimensionOverflow("transformed request drifted out of L")
    state.prev_image = transformed

    if f is None:
        return transformed, None
    f_out = f.precompose(iso.inverse())
    if isinstance(f_out, SubspaceIndicator):
        f_out = SubspaceIndicator(transformed, f_out.inner, f_out.guard_tol)
    return transformed, f_out


def pull_back(state, x_transformed):
    """Map a point played on the transformed request back to the ambient
    instance."""
    x_transformed = as_point(x_transformed)
    if state.prev_image.distance(x_transformed) > 1e-6 * (
        1.0 + float(np.linalg.norm(x_transformed))
    ):
        raise OffSubspace("point to pull back is not on the transformed request")
    return state.iso.inverse().apply(x_transformed)


def place_start(state, start, first_request: AffineSubspace):
    """A start point inside L with the same geometry relative to the
    transformed first request as ``start`` has to the original one: same
    in-subspace anchor, same orthogonal distance."""
    start = as_point(start)
    anchor = first_request.project(start)
    gap = float(np.linalg.norm(start - anchor))
    image_anchor = state.iso.apply(anchor)
    if gap <= 1e-14:
        return image_anchor
    axes = list(np.eye(state.ambient)[: state.m])
    free = orthonormalize(list(state.prev_image.basis) + axes, tol=1e-9)
    free = free[state.prev_image.dim :]
    if not free:
        raise DimensionOverflow("no free direction in L to place the start point")
    return image_anchor + gap * free[0]


def _slice_subspace(subspace, m):
    return AffineSubspace(subspace.base[:m], subspace.basis[:, :m])


def _slice_indicator(f, m):
    return SubspaceIndicator(_slice_subspace(f.subspace, m), f.inner, f.guard_tol)


class LiftedChaser:
    """Wrap a chaser living in the reduced space R^(2k+1).

    ``base_factory(start_point)`` builds the inner chaser on first use.
    Each request is transformed into L, handed to the inner chaser in
    sliced coordinates, and the move is pulled back to the ambient space.
    The inner chaser's own ledger is kept in ``base_records``.
    """

    kind = "lifted"

    def __init__(self, base_factory, k, start, ambient_d, cfg=None):
        self.base_factory = base_factory
        self.k = k
        self.ambient = ambient_d
        self.x = as_point(start)
        self.cfg = cfg
        self.state = None
        self.base = None
        self.base_records = []
        self._t = 0

    def movement_norm(self, a, b):
        return norm(as_point(a) - as_point(b), 2.0)

    def step(self, f):
        if not isinstance(f, SubspaceIndicator):
            raise DimensionMismatch("the lifted chaser expects subspace-supported requests")
        self._t += 1
        if self.state is None:
            self.state = init_reduction(f.subspace, self.k, self.ambient)
            start_image = place_start(self.state, self.x, f.subspace)
            self.state.start_image = start_image
            self.base = self.base_factory(start_image[: self.state.m])
        _, f_image = reduce_request(self.state, f.subspace, f)
        f_small = _slice_indicator(f_image, self.state.m)

        z_prev = self.base.x.copy()
        z = self.base.step(f_small)
        f0_small = f_small.normalized()
        movement = self.base.movement_norm(z, z_prev)
        hit = f0_small.value(z)
        hit_raw = f_small.value(z)
        from .chasers import StepRecord  # local import to avoid a cycle

        self.base_records.append(
            StepRecord(self._t, z_prev, z, movement, hit, movement + hit, hit_raw, movement + hit_raw)
        )

        z_full = np.zeros(self.ambient)
        z_full[: self.state.m] = z
        x_new = pull_back(self.state, z_full)
        self.x = x_new
        return x_new.copy()


def run_lifted(base_factory, k, instance, cfg=None):
    """Run the reduction pipeline on a subspace-request instance.

    Returns the ambient-space run result and the inner chaser's records;
    the two ledgers agree step by step up to accumulated float error.
    """
    from .chasers import run_chaser

    lifted = LiftedChaser(base_factory, k, instance.start, instance.dimension, cfg)
    result = run_chaser(lifted, instance)
    return result, lifted
