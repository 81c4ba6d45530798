"""Convex cost-function families: values, gradients, minimizers, and
conditioning metadata.

Each family carries declared strong-convexity / smoothness constants
``alpha`` and ``beta``.  The online algorithms never read these numbers;
only the analysis and the property suites do.  Construction verifies the
declaration for quadratics (eigenvalue bounds) and power-of-norm
functions; black-box oracles are trusted but can be spot-checked with
:func:`sampled_conditioning_check`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidSet, NotDifferentiable, OffSubspace
from .geometry import AffineSubspace, as_point


class ConvexFunction:
    """Common interface for the cost-function families."""

    dim = None
    alpha = 0.0
    beta = np.inf

    @property
    def kappa(self):
        if self.alpha <= 0:
            return np.inf
        return self.beta / self.alpha

    def value(self, x):
        raise NotImplementedError

    def values(self, xs):
        """Vectorized value evaluation on rows of ``xs``."""
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        return np.array([self.value(row) for row in xs])

    def gradient(self, x):
        raise NotImplementedError

    def minimizer(self):
        raise NotImplementedError

    def min_value(self):
        raise NotImplementedError

    def normalized(self):
        """Copy of the function shifted so its global minimum value is 0."""
        raise NotImplementedError

    def precompose(self, iso):
        """The function x -> f(iso(x)), which stays in the same family."""
        raise NotImplementedError

    def conditioning(self):
        return (self.alpha, self.beta, self.kappa)

    def _check_dim(self, x):
        x = as_point(x)
        if x.size != self.dim:
            raise DimensionMismatch(f"expected dimension {self.dim}, got {x.size}")
        return x


class Quadratic(ConvexFunction):
    """f(x) = 0.5 (x-c)^T H (x-c) + offset with symmetric PSD H.

    ``hessian`` may be passed as a full matrix or as a 1-d diagonal.
    """

    def __init__(self, hessian, center, offset=0.0):
        h = np.asarray(hessian, dtype=float)
        if h.ndim == 1:
            h = np.diag(h)
        self.center = as_point(center)
        if h.shape != (self.center.size, self.center.size):
            raise DimensionMismatch("hessian shape must match the center dimension")
        scale = 1.0 + float(np.max(np.abs(h))) if h.size else 1.0
        if float(np.max(np.abs(h - h.T))) > 1e-10 * scale:
            raise InvalidSet("quadratic hessian must be symmetric")
        h = 0.5 * (h + h.T)
        eigvals = np.linalg.eigvalsh(h)
        if eigvals[0] < -1e-9 * scale:
            raise InvalidSet(f"quadratic hessian must be PSD; min eigenvalue {eigvals[0]}")
        self.hessian = h
        self.offset = float(offset)
        if self.offset < 0:
            raise InvalidSet("offset must be nonnegative")
        self.alpha = float(max(eigvals[0], 0.0))
        self.beta = float(eigvals[-1])
        self._eig = None

    @property
    def dim(self):
        return self.center.size

    def eig(self):
        """Cached eigendecomposition, used by trust-region solves."""
        if self._eig is None:
            lam, vecs = np.linalg.eigh(self.hessian)
            self._eig = (np.maximum(lam, 0.0), vecs)
        return self._eig

    def value(self, x):
        z = self._check_dim(x) - self.center
        return float(0.5 * z @ (self.hessian @ z)) + self.offset

    def values(self, xs):
        z = np.atleast_2d(np.asarray(xs, dtype=float)) - self.center
        return 0.5 * np.einsum("ni,ij,nj->n", z, self.hessian, z) + self.offset

    def gradient(self, x):
        z = self._check_dim(x) - self.center
        return self.hessian @ z

    def minimizer(self):
        return self.center.copy()

    def min_value(self):
        return self.offset

    def normalized(self):
        if self.offset == 0.0:
            return self
        return Quadratic(self.hessian, self.center, 0.0)

    def precompose(self, iso):
        q = iso.q
        h = q.T @ self.hessian @ q
        center = iso.inverse().apply(self.center)
        return Quadratic(h, center, self.offset)


class PowerNorm(ConvexFunction):
    """f(x) = scale * ||x - center||_2 ** exponent, exponent >= 1.

    The declared conditioning bound ``kappa`` records the well-centered
    sandwich constants alpha = 2*scale/kappa:
    (alpha/2) r^g <= f <= (alpha*kappa/2) r^g, the upper side tight.
    """

    def __init__(self, scale, exponent, center, kappa=1.0):
        self.scale = float(scale)
        self.exponent = float(exponent)
        self.center = as_point(center)
        self.kappa_declared = float(kappa)
        if self.scale <= 0:
            raise InvalidSet("scale must be positive")
        if self.exponent < 1:
            raise InvalidSet("exponent must be at least 1")
        if self.kappa_declared < 1:
            raise InvalidSet("conditioning bound must be at least 1")
        self.alpha = 2.0 * self.scale / self.kappa_declared
        self.beta = self.alpha * self.kappa_declared

    @property
    def kappa(self):
        return self.kappa_declared

    @property
    def dim(self):
        return self.center.size

    def value(self, x):
        r = float(np.linalg.norm(self._check_dim(x) - self.center))
        return self.scale * r**self.exponent

    def values(self, xs):
        z = np.atleast_2d(np.asarray(xs, dtype=float)) - self.center
        r = np.linalg.norm(z, axis=1)
        return self.scale * r**self.exponent

    def gradient(self, x):
        z = self._check_dim(x) - self.center
        r = float(np.linalg.norm(z))
        if r == 0.0:
            if self.exponent > 1.0:
                return np.zeros_like(z)
            raise NotDifferentiable("power-norm function with exponent 1 has a kink at its center")
        return self.scale * self.exponent * r ** (self.exponent - 2.0) * z

    def minimizer(self):
        return self.center.copy()

    def min_value(self):
        return 0.0

    def normalized(self):
        return self

    def precompose(self, iso):
        return PowerNorm(
            self.scale, self.exponent, iso.inverse().apply(self.center), self.kappa_declared
        )


class SubspaceIndicator(ConvexFunction):
    """Request supported on an affine subspace, optionally carrying an
    inner quadratic expressed in the subspace's basis coordinates.

    Off the subspace the function is conceptually infinite; evaluation
    beyond ``guard_tol`` raises :class:`OffSubspace` instead of producing
    infinities.  The chaser must land on the subspace.
    """

    def __init__(self, subspace: AffineSubspace, inner: Quadratic | None = None, guard_tol=1e-8):
        self.subspace = subspace
        self.inner = inner
        self.guard_tol = float(guard_tol)
        if inner is not None and inner.dim != subspace.dim:
            raise DimensionMismatch(
                f"inner function has dimension {inner.dim}, subspace has {subspace.dim}"
            )
        if inner is not None:
            self.alpha = inner.alpha
            self.beta = inner.beta
        else:
            self.alpha = 0.0
            self.beta = 0.0

    @property
    def dim(self):
        return self.subspace.ambient_dim

    def _coords_checked(self, x):
        x = self._check_dim(x)
        if self.subspace.distance(x) > self.guard_tol * (1.0 + float(np.linalg.norm(x))):
            raise OffSubspace("point is too far from the request's subspace")
        return self.subspace.coords(x)

    def value(self, x):
        z = self._coords_checked(x)
        if self.inner is None:
            return 0.0
        return self.inner.value(z)

    def gradient(self, x):
        # tangent gradient lifted to ambient coordinates
        z = self._coords_checked(x)
        if self.inner is None:
            return np.zeros(self.dim)
        return self.subspace.basis.T @ self.inner.gradient(z)

    def minimizer(self):
        if self.inner is None:
            return self.subspace.base.copy()
        return self.subspace.lift(self.inner.minimizer())

    def min_value(self):
        if self.inner is None:
            return 0.0
        return self.inner.min_value()

    def normalized(self):
        if self.inner is None or self.inner.offset == 0.0:
            return self
        return SubspaceIndicator(self.subspace, self.inner.normalized(), self.guard_tol)

    def precompose(self, iso):
        inv = iso.inverse()
        sub = inv.apply_to_subspace(self.subspace)
        return SubspaceIndicator(sub, self.inner, self.guard_tol)


class BlackBoxFunction(ConvexFunction):
    """User-supplied value/gradient oracles with declared conditioning.

    Declarations are trusted; :func:`sampled_conditioning_check` can
    falsify them on random probes.
    """

    def __init__(self, value_fn, gradient_fn, minimizer, alpha, beta, min_value=None, dim=None):
        self._value = value_fn
        self._gradient = gradient_fn
        self._minimizer = as_point(minimizer)
        self.alpha = float(alpha)
        self.beta = float(beta)
        if self.alpha > self.beta:
            raise InvalidSet("alpha must not exceed beta")
        self._dim = int(dim) if dim is not None else self._minimizer.size
        self._min_value = (
            float(min_value) if min_value is not None else float(value_fn(self._minimizer))
        )

    @property
    def dim(self):
        return self._dim

    def value(self, x):
        return float(self._value(self._check_dim(x)))

    def gradient(self, x):
        return as_point(self._gradient(self._check_dim(x)))

    def minimizer(self):
        return self._minimizer.copy()

    def min_value(self):
        return self._min_value

    def normalized(self):
        if self._min_value == 0.0:
            return self
        shift = self._min_value
        return BlackBoxFunction(
            lambda x: self._value(x) - shift,
            self._gradient,
            self._minimizer,
            self.alpha,
            self.beta,
            min_value=0.0,
            dim=self._dim,
        )

    def precompose(self, iso):
        inv = iso.inverse()
        qt = iso.q.T
        return BlackBoxFunction(
            lambda x: self._value(iso.apply(x)),
            lambda x: qt @ as_point(self._gradient(iso.apply(x))),
            inv.apply(self._minimizer),
            self.alpha,
            self.beta,
            min_value=self._min_value,
            dim=self._dim,
        )


def evaluate(f, x):
    """Value of f at x (errors on dimension mismatch / off-subspace)."""
    return f.value(x)


def gradient(f, x):
    """Gradient of f at x."""
    return f.gradient(x)


def global_minimizer(f):
    """Global minimizer of f (for indicators: lifted inner minimizer)."""
    return f.minimizer()


def normalize_zero_min(f):
    """f shifted so that min f = 0; same alpha, beta, and minimizer."""
    return f.normalized()


def conditioning(f):
    """(alpha, beta, kappa) triple declared/derived for f."""
    return f.conditioning()


def sampled_conditioning_check(f, rng, n_samples=200, scale=1.0, slack=1e-9):
    """Spot-check the declared (alpha, beta) on random point pairs.

    Returns a dict with the worst signed violations of the strong
    convexity and smoothness inequalities (negative = satisfied).
    """
    worst_sc = -np.inf
    worst_sm = -np.inf
    center = f.minimizer()
    for _ in range(n_samples):
        x = center + scale * rng.standard_normal(f.dim)
        y = center + scale * rng.standard_normal(f.dim)
        gap = f.value(y) - f.value(x) - float(f.gradient(x) @ (y - x))
        dist2 = float(np.linalg.norm(x - y)) ** 2
        worst_sc = max(worst_sc, 0.5 * f.alpha * dist2 - gap - slack)
        worst_sm = max(worst_sm, gap - 0.5 * f.beta * dist2 - slack)
    return {
        "strong_convexity_violation": worst_sc,
        "smoothness_violation": worst_sm,
        "ok": worst_sc <= 0 and worst_sm <= 0,
    }
