"""Numerical subroutines: scalar root finding, constrained minimization,
the balanced-descent inner program, and the offline-optimum benchmark.

Closed-form fast paths (eigendecomposition trust-region solves, affine
restrictions, radial projections) are used where the function family
allows; everything else falls back to projected gradient descent with
Dykstra projections.  Both routes satisfy the same fixed-point contract
and are cross-tested.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidSet, NoBracket, NonConvergence
from .functions import PowerNorm, Quadratic, SubspaceIndicator
from .geometry import (
    AffineSet,
    Ball,
    HalfspaceIntersection,
    WholeSpace,
    as_point,
    dykstra_project,
    project_ball,
)


@dataclass
class SolverConfig:
    tol: float = 1e-9
    max_iter: int = 100_000
    step_rule: str = "fixed"  # "fixed" (1/beta) or "backtracking"
    offline_eps: tuple = (1e-2, 1e-4, 1e-6)
    offline_max_iter: int = 600

    def __post_init__(self):
        if self.tol <= 0:
            raise InvalidSet("tolerance must be positive")
        if self.max_iter <= 0:
            raise InvalidSet("iteration cap must be positive")
        if self.step_rule not in ("fixed", "backtracking"):
            raise InvalidSet(f"unknown step rule {self.step_rule!r}")


DEFAULT_CONFIG = SolverConfig()


def bisect_root(g, lo, hi, tol=1e-12, max_iter=300):
    """Root of a continuous scalar function on a sign-changing bracket.

    Keeps the invariant g(lo) <= 0 <= g(hi) (orientation detected from the
    endpoints), so for concave g with g(lo) <= 0 the returned root is the
    leftmost crossing.
    """
    lo = float(lo)
    hi = float(hi)
    glo = g(lo)
    ghi = g(hi)
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if glo * ghi > 0:
        raise NoBracket(f"g({lo})={glo} and g({hi})={ghi} have the same sign")
    sign = 1.0 if glo < 0 else -1.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol or mid == lo or mid == hi:
            break
        gm = sign * g(mid)
        if gm == 0.0:
            return mid
        if gm < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# closed-form building blocks


def _quad_trust_region(f: Quadratic, ball_center, radius):
    """argmin of a quadratic over a Euclidean ball, via the secular
    equation in the eigenbasis of the hessian."""
    ball_center = as_point(ball_center)
    lam, vecs = f.eig()
    delta = f.center - ball_center
    if float(np.linalg.norm(delta)) <= radius:
        return f.center.copy()
    w = vecs.T @ delta
    # flat directions contribute nothing: the minimizing set may still
    # intersect the ball through its range component
    num = lam * w

    def move_norm2(eta):
        scaled = num / (lam + eta)
        return float(scaled @ scaled)

    if move_norm2(0.0) <= radius * radius:
        step = num / np.where(lam > 0, lam, 1.0)
        step[lam <= 0] = 0.0
        return ball_center + vecs @ step
    eta_hi = 1.0
    for _ in range(200):
        if move_norm2(eta_hi) < radius * radius:
            break
        eta_hi *= 4.0
    eta_lo = 0.0
    for _ in range(100):
        eta = 0.5 * (eta_lo + eta_hi)
        if move_norm2(eta) > radius * radius:
            eta_lo = eta
        else:
            eta_hi = eta
    eta = 0.5 * (eta_lo + eta_hi)
    return ball_center + vecs @ (num / (lam + eta))


def _quad_restricted(f: Quadratic, subspace):
    """Quadratic in the subspace's basis coordinates equal to f on it."""
    b = subspace.basis  # (k, d)
    hz = b @ f.hessian @ b.T
    rhs = b @ (f.hessian @ (f.center - subspace.base))
    cz, *_ = np.linalg.lstsq(hz, rhs, rcond=None)
    offset = f.value(subspace.lift(cz))
    return Quadratic(hz, cz, max(offset, 0.0))


def _quad_affine_min(f: Quadratic, subspace):
    reduced = _quad_restricted(f, subspace)
    return subspace.lift(reduced.center)


def _intersection_projector(feasible, ball_center, radius, tol, max_iter):
    """Projector onto feasible ∩ B(ball_center, radius)."""
    if isinstance(feasible, WholeSpace):
        return lambda x: project_ball(x, ball_center, radius)
    if isinstance(feasible, AffineSet):
        sub = feasible.subspace
        anchor = sub.project(ball_center)
        gap = float(np.linalg.norm(ball_center - anchor))
        if gap > radius + 1e-12:
            raise InvalidSet("ball does not reach the affine set")
        reduced_r = float(np.sqrt(max(radius * radius - gap * gap, 0.0)))

        def proj(x):
            z = sub.project(x)
            if reduced_r <= 0.0:
                return anchor.copy()
            return project_ball(z, anchor, reduced_r)

        return proj
    parts = [lambda x: project_ball(x, ball_center, radius)]
    if isinstance(feasible, Ball):
        parts.append(lambda x: project_ball(x, feasible.center, feasible.radius))
    elif isinstance(feasible, HalfspaceIntersection):
        parts.append(lambda x: feasible.project(x, tol=tol, max_iter=max_iter))
    else:
        parts.append(lambda x: feasible.project(x, tol=tol, max_iter=max_iter))
    return lambda x: dykstra_project(x, parts, tol=tol, max_iter=max_iter)


def _pgd(f, project, start, cfg, tol=None, beta=None):
    """Projected gradient descent to a fixed point of the projected step."""
    tol = cfg.tol if tol is None else tol
    beta = f.beta if beta is None else beta
    backtracking = cfg.step_rule == "backtracking" or not np.isfinite(beta) or beta <= 0
    step = 1.0 / beta if not backtracking else 1.0
    x = project(as_point(start))
    fx = f.value(x)
    for _ in range(cfg.max_iter):
        g = f.gradient(x)
        while True:
            x_new = project(x - step * g)
            if not backtracking:
                break
            f_new = f.value(x_new)
            dx = x_new - x
            if f_new <= fx + float(g @ dx) + 0.5 / step * float(dx @ dx) + 1e-14:
                break
            step *= 0.5
            if step < 1e-16:
                return x
        move = float(np.linalg.norm(x_new - x))
        x = x_new
        fx = f.value(x)
        if backtracking:
            step *= 1.3
        if move <= tol * (1.0 + float(np.linalg.norm(x))):
            return x
    raise NonConvergence("projected gradient descent hit its iteration cap", best=x)


def constrained_minimize(f, feasible, start=None, cfg=None, tol=None):
    """Minimizer of f over the feasible set.

    Exact for the closed-form family/set pairs; otherwise a projected
    gradient fixed point to tolerance.
    """
    cfg = cfg or DEFAULT_CONFIG
    if isinstance(feasible, WholeSpace):
        return f.minimizer()
    if isinstance(f, SubspaceIndicator):
        if isinstance(feasible, AffineSet) and feasible.subspace is f.subspace:
            return f.minimizer()
        raise InvalidSet(
            "subspace requests are minimized over the whole space or their own subspace"
        )
    if isinstance(f, PowerNorm):
        return feasible.project(f.center, tol=cfg.tol)
    if isinstance(f, Quadratic):
        if isinstance(feasible, Ball):
            return _quad_trust_region(f, feasible.center, feasible.radius)
        if isinstance(feasible, AffineSet):
            return _quad_affine_min(f, feasible.subspace)
    if start is None:
        start = f.minimizer()
    project = lambda x: feasible.project(x, tol=min(cfg.tol, 1e-10))
    return _pgd(f, project, start, cfg, tol=tol)


def cobd_inner(f, x_prev, radius, feasible, cfg=None, warm=None, tol=None):
    """argmin of f over feasible ∩ B(x_prev, radius), the convex inner
    program of the balanced-descent step."""
    cfg = cfg or DEFAULT_CONFIG
    x_prev = as_point(x_prev)
    if radius < 0:
        raise InvalidSet("ball radius must be nonnegative")
    if radius == 0.0:
        return x_prev.copy()
    if isinstance(f, Quadratic) and isinstance(feasible, WholeSpace):
        return _quad_trust_region(f, x_prev, radius)
    if isinstance(f, Quadratic) and isinstance(feasible, AffineSet):
        sub = feasible.subspace
        anchor = sub.project(x_prev)
        gap = float(np.linalg.norm(x_prev - anchor))
        if gap > radius + 1e-9 * (1.0 + radius):
            raise InvalidSet("ball does not reach the affine set")
        reduced_r = float(np.sqrt(max(radius * radius - gap * gap, 0.0)))
        reduced = _quad_restricted(f, sub)
        if reduced_r <= 0.0:
            return anchor
        z = _quad_trust_region(reduced, sub.coords(anchor), reduced_r)
        return sub.lift(z)
    if isinstance(f, SubspaceIndicator) and isinstance(feasible, AffineSet):
        if feasible.subspace is not f.subspace and not (
            feasible.subspace.dim == f.subspace.dim
            and f.subspace.contains(feasible.subspace.base)
        ):
            raise InvalidSet("feasible subspace must agree with the request's subspace")
        sub = f.subspace
        anchor = sub.project(x_prev)
        gap = float(np.linalg.norm(x_prev - anchor))
        if gap > radius + 1e-9 * (1.0 + radius):
            raise InvalidSet("ball does not reach the request subspace")
        reduced_r = float(np.sqrt(max(radius * radius - gap * gap, 0.0)))
        if f.inner is None or reduced_r <= 0.0:
            return anchor
        z = _quad_trust_region(f.inner, sub.coords(anchor), reduced_r)
        return sub.lift(z)
    if isinstance(f, PowerNorm):
        project = _intersection_projector(feasible, x_prev, radius, cfg.tol, cfg.max_iter)
        return project(f.center)
    project = _intersection_projector(
        feasible, x_prev, radius, min(cfg.tol, 1e-10), cfg.max_iter
    )
    start = warm if warm is not None else x_prev
    return _pgd(f, project, start, cfg, tol=tol)


# ---------------------------------------------------------------------------
# offline optimum


@dataclass
class OfflineResult:
    """Benchmark trajectory with its (upper-bound) total cost.

    The cost reported is the true unsmoothed objective on the returned
    trajectory, so it always upper-bounds the true offline optimum; any
    competitive ratio computed against it lower-bounds the realized ratio.
    """

    trajectory: np.ndarray  # (T, d): the points x_1..x_T
    cost: float
    certificate: list  # per-step dicts with movement and hit entries
    method: str
    converged: bool = True
    warm_start: str = ""

    def __post_init__(self):
        recomputed = sum(step["movement"] + step["hit"] for step in self.certificate)
        if abs(recomputed - self.cost) > 1e-8 * (1.0 + abs(self.cost)):
            raise InvalidSet("offline certificate does not reproduce the reported cost")


def _objective_parts(functions, x0, traj):
    full = np.vstack([x0, traj])
    diffs = np.diff(full, axis=0)
    moves = np.linalg.norm(diffs, axis=1)
    hits = np.array([f.value(x) for f, x in zip(functions, traj)])
    return moves, hits


def true_cost(functions, x0, traj):
    """The movement-plus-hit objective of a trajectory."""
    moves, hits = _objective_parts(functions, x0, traj)
    return float(moves.sum() + hits.sum())


def _certificate(functions, x0, traj):
    moves, hits = _objective_parts(functions, x0, traj)
    return [
        {"t": t + 1, "movement": float(m), "hit": float(h)}
        for t, (m, h) in enumerate(zip(moves, hits))
    ]


def _stacked_quadratics(functions):
    if not all(isinstance(f, Quadratic) for f in functions):
        return None
    hs = np.array([f.hessian for f in functions])
    cs = np.array([f.center for f in functions])
    offs = np.array([f.offset for f in functions])
    return hs, cs, offs


def _smoothed_problem(functions, x0, eps, stacked):
    eps2 = eps * eps

    def hit_and_grad(traj):
        if stacked is not None:
            hs, cs, offs = stacked
            z = traj - cs
            hz = np.einsum("tij,tj->ti", hs, z)
            return float(0.5 * np.einsum("ti,ti->", z, hz) + offs.sum()), hz
        total = 0.0
        grads = np.empty_like(traj)
        for t, f in enumerate(functions):
            total += f.value(traj[t])
            grads[t] = f.gradient(traj[t])
        return total, grads

    def value(traj):
        diffs = np.diff(np.vstack([x0, traj]), axis=0)
        mv = float(np.sqrt((diffs * diffs).sum(axis=1) + eps2).sum())
        hit, _ = hit_and_grad(traj)
        return mv + hit

    def value_and_grad(traj):
        diffs = np.diff(np.vstack([x0, traj]), axis=0)
        lens = np.sqrt((diffs * diffs).sum(axis=1) + eps2)
        mv = float(lens.sum())
        units = diffs / lens[:, None]
        hit, hit_grads = hit_and_grad(traj)
        grad = hit_grads + units
        grad[:-1] -= units[1:]
        return mv + hit, grad

    return value, value_and_grad


def _accelerated_descent(traj, functions, x0, feasible, eps, lipschitz, max_iter, stacked):
    """FISTA with backtracking and function-value restart on the smoothed
    objective; rows are projected onto the feasible set."""
    value, value_and_grad = _smoothed_problem(functions, x0, eps, stacked)

    def project(traj):
        if isinstance(feasible, WholeSpace):
            return traj
        return np.array([feasible.project(row, tol=1e-11) for row in traj])

    x = project(traj.copy())
    y = x.copy()
    fx = value(x)
    lip = max(lipschitz, 1.0) + 2.0 / eps
    t_momentum = 1.0
    converged = False
    stall = 0
    for _ in range(max_iter):
        fy, gy = value_and_grad(y)
        while True:
            x_new = project(y - gy / lip)
            dx = x_new - y
            quad = fy + float((gy * dx).sum()) + 0.5 * lip * float((dx * dx).sum())
            f_new = value(x_new)
            if f_new <= quad + 1e-12 * (1.0 + abs(quad)):
                break
            lip *= 2.0
            if lip > 1e18:
                return x, converged
        if f_new > fx:  # restart momentum on a non-monotone step
            y = x.copy()
            t_momentum = 1.0
            stall += 1
            if stall >= 8:
                converged = True
                break
            continue
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_momentum * t_momentum))
        y = x_new + ((t_momentum - 1.0) / t_next) * (x_new - x)
        move = float(np.sqrt(((x_new - x) ** 2).sum()))
        stall = stall + 1 if fx - f_new <= 1e-13 * (1.0 + abs(fx)) else 0
        x = x_new
        fx = f_new
        t_momentum = t_next
        lip = max(lip * 0.9, 1e-8)
        if move <= 1e-11 * (1.0 + float(np.abs(x).max())) or stall >= 8:
            converged = True
            break
    return x, converged


def offline_opt(instance, cfg=None, alg_trajectory=None):
    """Upper bound on the offline optimum of an instance.

    Gradient descent on a smoothed objective (movement norms replaced by
    sqrt(||v||^2 + eps^2), eps annealed), warm-started from the
    follow-the-minimizer trajectory, the algorithm trajectory under
    evaluation (when given), and the stay-at-start trajectory; best of
    the warm starts and their descents under the true objective.
    """
    cfg = cfg or DEFAULT_CONFIG
    functions = instance.functions
    horizon = instance.horizon
    if horizon < 1:
        raise InvalidSet("offline optimum needs at least one request")
    x0 = instance.start
    feasible = instance.feasible
    d = instance.dimension

    warm_starts = {}
    follow = np.empty((horizon, d))
    prev = x0
    for t, f in enumerate(functions):
        prev = constrained_minimize(f, feasible, start=prev, cfg=cfg)
        follow[t] = prev
    warm_starts["follow-min"] = follow
    if alg_trajectory is not None:
        traj = np.atleast_2d(np.asarray(alg_trajectory, dtype=float))
        if traj.shape[0] == horizon + 1:
            traj = traj[1:]
        if traj.shape != (horizon, d):
            raise DimensionMismatch("algorithm trajectory shape does not match the instance")
        if not isinstance(feasible, WholeSpace):
            traj = np.array([feasible.project(row) for row in traj])
        warm_starts["algorithm"] = traj
    warm_starts["stay"] = np.tile(x0, (horizon, 1))

    stacked = _stacked_quadratics(functions)
    betas = [f.beta for f in functions if np.isfinite(f.beta) and f.beta > 0]
    lipschitz = max(betas) if betas else 1.0

    best = None
    for label, warm in warm_starts.items():
        candidates = [(warm, True, label)]
        traj = warm.copy()
        converged = True
        for eps in cfg.offline_eps:
            traj, conv = _accelerated_descent(
                traj, functions, x0, feasible, eps, lipschitz, cfg.offline_max_iter, stacked
            )
            converged = converged and conv
        candidates.append((traj, converged, label))
        for cand, conv, lab in candidates:
            cost = true_cost(functions, x0, cand)
            if best is None or cost < best[1]:
                best = (cand, cost, conv, lab)

    traj, cost, converged, label = best
    return OfflineResult(
        trajectory=traj,
        cost=cost,
        certificate=_certificate(functions, x0, traj),
        method="smoothed-descent",
        converged=converged,
        warm_start=label,
    )


def offline_opt_grid_1d(instance, grid_lo, grid_hi, n_points):
    """Exact offline optimum over a uniform 1-d grid, by dynamic
    programming; the independent oracle for offline_opt on the line."""
    if instance.dimension != 1:
        raise DimensionMismatch("grid dynamic programming is one-dimensional only")
    if n_points < 2:
        raise InvalidSet("need at least two grid points")
    grid = np.linspace(grid_lo, grid_hi, n_points)
    spacing = grid[1] - grid[0]
    x0 = float(instance.start[0])
    pts = grid[:, None]

    tables = []
    dp = np.abs(grid - x0) + instance.functions[0].values(pts)
    tables.append(dp)
    idx_cost = np.arange(n_points) * spacing
    for f in instance.functions[1:]:
        # min_j dp[j] + |g_i - g_j| via prefix/suffix scans on a uniform grid
        left = np.minimum.accumulate(dp - idx_cost) + idx_cost
        right = (np.minimum.accumulate((dp + idx_cost)[::-1]) - idx_cost[::-1])[::-1]
        dp = np.minimum(left, right) + f.values(pts)
        tables.append(dp)

    i = int(np.argmin(tables[-1]))
    path = [grid[i]]
    for t in range(len(tables) - 1, 0, -1):
        # tables[t][i] = f_t(g_i) + min_j tables[t-1][j] + |g_i - g_j|
        scores = tables[t - 1] + np.abs(grid - grid[i])
        i = int(np.argmin(scores))
        path.append(grid[i])
    traj = np.array(path[::-1])[:, None]

    cost = float(tables[-1].min())
    return OfflineResult(
        trajectory=traj,
        cost=cost,
        certificate=_certificate(instance.functions, instance.start, traj),
        method="grid-dp",
        converged=True,
    )
