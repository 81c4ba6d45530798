"""Geometric substrate: norms, convex-set projections, orthonormal bases,
and affine isometries.

Points and vectors are plain 1-d numpy float arrays.  Every operation is
pure and never mutates its inputs, so values can be shared freely across
concurrent workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidSet, NonConvergence

# Rank decisions (basis extraction, span membership) use this tolerance.
RANK_TOL = 1e-10
# Orthogonality drift on composed isometries is repaired beyond this.
DRIFT_TOL = 1e-8


def as_point(x):
    """Coerce to a 1-d float array."""
    return np.asarray(x, dtype=float)


def norm(v, p=2.0):
    """lp norm of a vector, for any real p >= 1 including inf."""
    if p < 1:
        raise ValueError(f"norm exponent must be >= 1, got {p}")
    v = as_point(v)
    if p == 2.0:
        return float(np.linalg.norm(v))
    return float(np.linalg.norm(v, ord=p))


def project_ball(x, center, radius):
    """Euclidean projection onto the closed ball B(center, radius)."""
    if radius <= 0:
        raise InvalidSet(f"ball radius must be positive, got {radius}")
    x = as_point(x)
    center = as_point(center)
    diff = x - center
    dist = float(np.linalg.norm(diff))
    if dist <= radius:
        return x.copy()
    return center + (radius / dist) * diff


def orthonormalize(vectors, tol=RANK_TOL):
    """Orthonormal basis of span(vectors) via modified Gram-Schmidt.

    Projection residuals are removed twice for numerical stability.
    Vectors whose residual norm falls below ``tol`` are dropped, which
    doubles as numerical rank detection.
    """
    basis = []
    for v in vectors:
        u = as_point(v).copy()
        for _ in range(2):
            for b in basis:
                u -= (u @ b) * b
        nrm = float(np.linalg.norm(u))
        if nrm >= tol:
            basis.append(u / nrm)
    return basis


@dataclass
class AffineSubspace:
    """Affine subspace base + span(rows of basis); rows are orthonormal."""

    base: np.ndarray
    basis: np.ndarray  # shape (k, d), rows orthonormal

    def __post_init__(self):
        self.base = as_point(self.base)
        b = np.asarray(self.basis, dtype=float)
        if b.size == 0:
            b = np.zeros((0, self.base.size))
        b = np.atleast_2d(b)
        if b.shape[1] != self.base.size:
            raise DimensionMismatch(
                f"basis is {b.shape[1]}-dimensional but base is {self.base.size}-dimensional"
            )
        if b.shape[0] > 0:
            gram = b @ b.T
            if np.max(np.abs(gram - np.eye(b.shape[0]))) > 1e-8:
                raise InvalidSet("subspace basis rows must be orthonormal")
        self.basis = b

    @classmethod
    def from_spanning(cls, base, vectors, tol=RANK_TOL):
        """Build from any spanning set; orthonormalizes and drops rank."""
        ortho = orthonormalize(vectors, tol)
        base = as_point(base)
        if ortho:
            return cls(base, np.array(ortho))
        return cls(base, np.zeros((0, base.size)))

    @property
    def dim(self):
        return self.basis.shape[0]

    @property
    def ambient_dim(self):
        return self.base.size

    def coords(self, x):
        """Coordinates of x in the basis (x is assumed near the subspace)."""
        return self.basis @ (as_point(x) - self.base)

    def lift(self, z):
        """Point of the subspace with the given basis coordinates."""
        return self.base + self.basis.T @ as_point(z)

    def project(self, x):
        x = as_point(x)
        z = x - self.base
        return self.base + self.basis.T @ (self.basis @ z)

    def distance(self, x):
        return float(np.linalg.norm(as_point(x) - self.project(x)))

    def contains(self, x, tol=1e-8):
        return self.distance(x) <= tol


def project_affine(x, subspace):
    """Orthogonal projection onto an affine subspace."""
    return subspace.project(x)


def _project_halfspace(x, normal, offset):
    # halfspace is {z : normal . z <= offset}
    viol = float(normal @ x) - offset
    if viol <= 0:
        return x
    return x - (viol / float(normal @ normal)) * normal


def dykstra_project(x, projectors, tol=1e-10, max_iter=100_000):
    """Dykstra's alternating projections onto an intersection of convex sets.

    ``projectors`` is a list of single-set projection callables.  Iterates
    until the per-cycle displacement drops below ``tol``.
    """
    x = as_point(x).copy()
    corrections = [np.zeros_like(x) for _ in projectors]
    for _ in range(max_iter):
        prev = x.copy()
        for i, proj in enumerate(projectors):
            y = proj(x + corrections[i])
            corrections[i] = x + corrections[i] - y
            x = y
        if float(np.linalg.norm(x - prev)) <= tol:
            return x
    raise NonConvergence("dykstra_project hit the iteration cap", best=x)


class FeasibleSet:
    """Convex action space with an exact or iterative projection."""

    def project(self, x, tol=1e-10, max_iter=100_000):
        raise NotImplementedError

    def contains(self, x, tol=1e-8):
        return float(np.linalg.norm(as_point(x) - self.project(x))) <= tol


class WholeSpace(FeasibleSet):
    def project(self, x, tol=1e-10, max_iter=100_000):
        return as_point(x).copy()

    def contains(self, x, tol=1e-8):
        return True

    def __repr__(self):
        return "WholeSpace()"


@dataclass
class Ball(FeasibleSet):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        self.center = as_point(self.center)
        self.radius = float(self.radius)
        if self.radius <= 0:
            raise InvalidSet(f"ball radius must be positive, got {self.radius}")

    def project(self, x, tol=1e-10, max_iter=100_000):
        return project_ball(x, self.center, self.radius)


@dataclass
class AffineSet(FeasibleSet):
    subspace: AffineSubspace

    def project(self, x, tol=1e-10, max_iter=100_000):
        return self.subspace.project(x)


@dataclass
class HalfspaceIntersection(FeasibleSet):
    """Intersection of halfspaces {x : normals[i] . x <= offsets[i]}.

    A feasible ``witness`` point is required so emptiness is caught at
    construction time; projections are Dykstra iterations to tolerance.
    """

    normals: np.ndarray  # (m, d)
    offsets: np.ndarray  # (m,)
    witness: np.ndarray  # (d,)

    def __post_init__(self):
        self.normals = np.atleast_2d(np.asarray(self.normals, dtype=float))
        self.offsets = np.atleast_1d(np.asarray(self.offsets, dtype=float))
        self.witness = as_point(self.witness)
        if self.normals.shape[0] != self.offsets.size:
            raise InvalidSet("one offset per halfspace normal is required")
        norms = np.linalg.norm(self.normals, axis=1)
        if np.any(norms < 1e-14):
            raise InvalidSet("halfspace normals must be nonzero")
        if np.max(self.normals @ self.witness - self.offsets) > 1e-9:
            raise InvalidSet("declared witness point violates a halfspace")

    def violation(self, x):
        """Largest constraint violation at x (0 when feasible)."""
        return float(max(np.max(self.normals @ as_point(x) - self.offsets), 0.0))

    def project(self, x, tol=1e-10, max_iter=100_000):
        x = as_point(x)
        if self.violation(x) <= 0.0:
            return x.copy()
        projs = [
            (lambda z, n=n, o=o: _project_halfspace(z, n, o))
            for n, o in zip(self.normals, self.offsets)
        ]
        return dykstra_project(x, projs, tol=tol, max_iter=max_iter)


def project_set(x, feasible, tol=1e-10, max_iter=100_000):
    """Projection onto a feasible set; iterative variants stop at ``tol``."""
    return feasible.project(x, tol=tol, max_iter=max_iter)


def _polar_orthogonalize(q):
    u, _, vt = np.linalg.svd(q)
    return u @ vt


@dataclass
class AffineIsometry:
    """Distance-preserving affine map x -> q @ x + shift with orthogonal q."""

    q: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.shift = as_point(self.shift)
        if self.q.shape[0] != self.q.shape[1] or self.q.shape[0] != self.shift.size:
            raise DimensionMismatch("rotation must be square and match the shift")

    @classmethod
    def identity(cls, d):
        return cls(np.eye(d), np.zeros(d))

    @property
    def dim(self):
        return self.shift.size

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return self.q @ x + self.shift
        return x @ self.q.T + self.shift

    def apply_to_subspace(self, subspace):
        return AffineSubspace(self.apply(subspace.base), subspace.basis @ self.q.T)

    def inverse(self):
        return AffineIsometry(self.q.T, -(self.q.T @ self.shift))

    def compose(self, inner):
        """self o inner, with orthogonality drift repair past DRIFT_TOL."""
        q = self.q @ inner.q
        shift = self.q @ inner.shift + self.shift
        out = AffineIsometry(q, shift)
        if out.gram_residual() > DRIFT_TOL:
            out = out.renormalized()
        return out

    def gram_residual(self):
        return float(np.max(np.abs(self.q.T @ self.q - np.eye(self.dim))))

    def renormalized(self):
        """Snap the rotation back to the nearest orthogonal matrix."""
        return AffineIsometry(_polar_orthogonalize(self.q), self.shift)

    def is_orthogonal(self, tol=1e-9):
        return self.gram_residual() <= tol


def _plane_rotation(d, v, u, cos_t, sin_t):
    # rotation in span{v, u}: v -> cos*v + sin*u, u -> -sin*v + cos*u
    g = np.eye(d)
    g += (cos_t - 1.0) * (np.outer(v, v) + np.outer(u, u))
    g += sin_t * (np.outer(u, v) - np.outer(v, u))
    return g


def rotation_mapping_subspace(fixed, source_dirs, target_dirs, tol=1e-12):
    """Isometry fixing ``fixed`` pointwise and rotating each source
    direction into span(target_dirs).

    Preconditions: source and target directions are orthonormal and
    orthogonal to ``fixed``'s direction space.  The map is the identity on
    the orthogonal complement of the moved planes, so sources already
    inside the target span are left untouched.
    """
    source_dirs = [as_point(s) for s in source_dirs]
    target_dirs = [as_point(t) for t in target_dirs]
    d = fixed.ambient_dim
    if len(target_dirs) < len(source_dirs):
        raise DimensionMismatch(
            f"{len(source_dirs)} directions to place but only "
            f"{len(target_dirs)} free target directions"
        )
    if not source_dirs:
        return AffineIsometry.identity(d)
    tmat = np.array(target_dirs)  # (n, d)
    fmat = fixed.basis
    for s in source_dirs:
        if fmat.shape[0] and np.max(np.abs(fmat @ s)) > 1e-8:
            raise DimensionMismatch("source directions must be orthogonal to the fixed subspace")

    q = np.eye(d)
    placed = []
    for s in source_dirs:
        sc = q @ s
        s_in = tmat.T @ (tmat @ sc)
        s_out = sc - s_in
        c = float(np.linalg.norm(s_out))
        if c <= max(tol, 1e-12):
            placed.append(sc)
            continue
        u = s_out / c
        # pick v in span(targets), orthogonal to already-placed images;
        # prefer the direction the source is already leaning toward
        v = None
        cand = s_in.copy()
        for pl in placed:
            cand -= (cand @ pl) * pl
        if float(np.linalg.norm(cand)) > 1e-8:
            v = cand / np.linalg.norm(cand)
        else:
            for trow in tmat:
                cand = trow.copy()
                for pl in placed:
                    cand -= (cand @ pl) * pl
                for pl in placed:
                    cand -= (cand @ pl) * pl
                if float(np.linalg.norm(cand)) > 1e-8:
                    v = cand / np.linalg.norm(cand)
                    break
        if v is None:
            raise DimensionMismatch("no free target direction left to rotate into")
        a = float(sc @ v)
        hyp = float(np.hypot(a, c))
        g = _plane_rotation(d, v, u, a / hyp, -c / hyp)
        q = g @ q
        placed.append(g @ sc)

    b = fixed.base
    return AffineIsometry(q, b - q @ b)
