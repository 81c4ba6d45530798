"""The online players: move-towards-minimizer (unconstrained and
constrained), constrained balanced descent, and a follow-the-minimizer
baseline, behind one stepping interface.

Requests supported on affine subspaces are played by entering the
subspace at the projection of the current point and running the step
rule inside it from there; the rule is deterministic and commutes with
isometries, which is what the dimension-reduction wrapper relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidSet, NonConvergence, NumericalAmbiguity
from .functions import SubspaceIndicator, normalize_zero_min
from .geometry import AffineSet, WholeSpace, as_point, norm
from .solvers import DEFAULT_CONFIG, SolverConfig, cobd_inner, constrained_minimize


def _balance_on_segment(x_prev, target, f, seg_norm_p, floor, cfg):
    """Point x on [x_prev, target] with ||x - x_prev|| = f(x) - floor.

    Bisection on h(s) = s*||target - x_prev|| - (f(x(s)) - floor); h is
    concave for convex f, so keeping h(lo) <= 0 converges to the smallest
    balancing movement when the root is not unique.
    """
    x_prev = as_point(x_prev)
    seg = target - x_prev
    seg_len = norm(seg, seg_norm_p)
    gap_prev = f.value(x_prev) - floor
    scale = 1.0 + abs(gap_prev)
    if seg_len <= 1e-15 * (1.0 + float(np.linalg.norm(x_prev))):
        return target.copy()
    if gap_prev <= cfg.tol * scale:
        return x_prev.copy()

    def h(s):
        return s * seg_len - (f.value(x_prev + s * seg) - floor)

    lo, hi = 0.0, 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if h(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return x_prev + (0.5 * (lo + hi)) * seg


def m2m_step(x_prev, f, p=2.0, cfg=None):
    """Move-towards-minimizer step: the point on the segment from x_prev
    to the global minimizer whose movement equals its hit cost.

    Expects f normalized to zero minimum.
    """
    cfg = cfg or DEFAULT_CONFIG
    return _balance_on_segment(as_point(x_prev), f.minimizer(), f, p, 0.0, cfg)


def constrained_m2m_step(x_prev, f, feasible, cfg=None):
    """Constrained variant: the segment runs to the feasible minimizer and
    the hit cost is measured above the feasible minimum."""
    cfg = cfg or DEFAULT_CONFIG
    x_prev = as_point(x_prev)
    x_star = constrained_minimize(f, feasible, start=x_prev, cfg=cfg)
    return _balance_on_segment(x_prev, x_star, f, 2.0, f.value(x_star), cfg)


def cobd_step(x_prev, f, feasible, cfg=None):
    """Constrained balanced-descent step.

    Binary search on the movement budget r: solve the convex program
    min f over feasible ∩ B(x_prev, r); if its value drops below r the
    optimal budget is smaller, otherwise larger.  The returned point
    either balances movement against hit cost or is the feasible
    minimizer with slack movement.
    """
    cfg = cfg or DEFAULT_CONFIG
    x_prev = as_point(x_prev)
    f_prev = f.value(x_prev)
    scale = 1.0 + f_prev
    tol_r = cfg.tol * scale
    if f_prev <= tol_r:
        return x_prev.copy()

    lo, hi = 0.0, f_prev
    warm = None
    loose = max(tol_r * 1e-2, 1e-12)
    while hi - lo > tol_r:
        r = 0.5 * (lo + hi)
        z = cobd_inner(f, x_prev, r, feasible, cfg, warm=warm, tol=loose)
        warm = z
        if f.value(z) < r:
            hi = r
        else:
            lo = r

    if lo == 0.0:
        x_new = cobd_inner(f, x_prev, hi, feasible, cfg, warm=warm)
    else:
        x_new = cobd_inner(f, x_prev, lo, feasible, cfg, warm=warm)

    movement = float(np.linalg.norm(x_new - x_prev))
    value = f.value(x_new)
    # a budget interval of width tol_r maps to a value gap of up to
    # (1 + ||grad f||) tol_r, so the balance detector must scale with it
    grad_norm = float(np.linalg.norm(f.gradient(x_new)))
    tol_balance = 10.0 * tol_r * (1.0 + grad_norm)
    if abs(value - movement) <= tol_balance:
        return x_new
    if value > movement:
        # slack regime: the point must be the feasible minimizer
        beta = f.beta if np.isfinite(f.beta) and f.beta > 0 else 1.0
        probe = feasible.project(x_new - f.gradient(x_new) / beta)
        if isinstance(f, SubspaceIndicator):
            probe = f.subspace.project(probe)
        residual = float(np.linalg.norm(x_new - probe))
        if residual <= tol_balance * (1.0 + float(np.linalg.norm(x_new))):
            return x_new
    raise NumericalAmbiguity(
        f"balanced step is neither balanced (|{value} - {movement}|) nor a slack minimizer"
    )


def follow_min_step(x_prev, f, feasible, cfg=None):
    """Baseline: jump to the feasible minimizer of the request."""
    cfg = cfg or DEFAULT_CONFIG
    return constrained_minimize(f, feasible, start=as_point(x_prev), cfg=cfg)


class Chaser:
    """Single-owner online player: holds its current point and feasible
    set, and advances one request at a time."""

    kind = None

    def __init__(self, start, feasible=None, cfg=None, p=2.0):
        self.feasible = feasible if feasible is not None else WholeSpace()
        self.cfg = cfg or SolverConfig()
        self.p = float(p)
        start = as_point(start)
        if not self.feasible.contains(start, tol=1e-7):
            raise InvalidSet("chaser must start inside its feasible set")
        self.x = self.feasible.project(start)

    def movement_norm(self, a, b):
        return norm(as_point(a) - as_point(b), self.p)

    def step(self, f):
        f0 = normalize_zero_min(f)
        if isinstance(f0, SubspaceIndicator):
            x_new = self._subspace_step(f0)
        else:
            x_new = self._smooth_step(f0)
        self.x = as_point(x_new)
        return self.x.copy()

    def _smooth_step(self, f0):
        raise NotImplementedError

    def _within_subspace_step(self, f0, entry, restriction):
        raise NotImplementedError

    def _subspace_step(self, f0):
        if not isinstance(self.feasible, WholeSpace):
            raise InvalidSet("subspace requests are supported with a whole-space action set")
        entry = f0.subspace.project(self.x)
        if f0.inner is None:
            return entry
        return self._within_subspace_step(f0, entry, AffineSet(f0.subspace))


class M2MChaser(Chaser):
    kind = "m2m"

    def __init__(self, start, feasible=None, cfg=None, p=2.0):
        super().__init__(start, feasible, cfg, p)
        if not isinstance(self.feasible, WholeSpace):
            raise InvalidSet("unconstrained move-towards-minimizer needs a whole-space action set")

    def _smooth_step(self, f0):
        return m2m_step(self.x, f0, p=self.p, cfg=self.cfg)

    def _within_subspace_step(self, f0, entry, restriction):
        return constrained_m2m_step(entry, f0, restriction, cfg=self.cfg)


class ConstrainedM2MChaser(Chaser):
    kind = "cm2m"

    def _smooth_step(self, f0):
        return constrained_m2m_step(self.x, f0, self.feasible, cfg=self.cfg)

    def _within_subspace_step(self, f0, entry, restriction):
        return constrained_m2m_step(entry, f0, restriction, cfg=self.cfg)


class COBDChaser(Chaser):
    kind = "cobd"

    def _smooth_step(self, f0):
        return cobd_step(self.x, f0, self.feasible, cfg=self.cfg)

    def _within_subspace_step(self, f0, entry, restriction):
        return cobd_step(entry, f0, restriction, cfg=self.cfg)


class FollowMinChaser(Chaser):
    kind = "followmin"

    def _smooth_step(self, f0):
        return follow_min_step(self.x, f0, self.feasible, cfg=self.cfg)

    def _within_subspace_step(self, f0, entry, restriction):
        return f0.minimizer()


CHASER_KINDS = {
    "m2m": M2MChaser,
    "cm2m": ConstrainedM2MChaser,
    "cobd": COBDChaser,
    "followmin": FollowMinChaser,
}


def make_chaser(kind, start, feasible=None, cfg=None, p=2.0):
    if kind not in CHASER_KINDS:
        raise InvalidSet(f"unknown chaser kind {kind!r}; choose from {sorted(CHASER_KINDS)}")
    return CHASER_KINDS[kind](start, feasible, cfg, p)


@dataclass
class StepRecord:
    """Per-step cost ledger entry.

    ``hit`` and ``total`` are measured against the zero-minimum
    normalization of the request; ``hit_raw`` and ``total_raw`` keep any
    constant offset (ratios use the raw figures, the per-step inequality
    checks the normalized ones).
    """

    t: int
    x_prev: np.ndarray
    x_new: np.ndarray
    movement: float
    hit: float
    total: float
    hit_raw: float
    total_raw: float


@dataclass
class RunResult:
    trajectory: np.ndarray  # (T+1, d), row 0 is the start point
    records: list
    total_cost: float  # raw objective
    total_cost_zero_min: float
    normalization_shift: float

    @property
    def movements(self):
        return np.array([r.movement for r in self.records])

    @property
    def hits(self):
        return np.array([r.hit for r in self.records])


def run_chaser(chaser, instance):
    """Drive a chaser through an instance and assemble the cost ledger.

    On a solver failure the raised error carries the partial run in its
    ``partial`` attribute.
    """
    traj = [chaser.x.copy()]
    records = []
    shift_total = 0.0
    for t, f in enumerate(instance.functions, start=1):
        x_prev = chaser.x.copy()
        try:
            x_new = chaser.step(f)
        except NonConvergence as err:
            err.partial = _assemble(traj, records, shift_total)
            raise
        shift = f.min_value()
        movement = chaser.movement_norm(x_new, x_prev)
        hit_raw = f.value(x_new)
        hit = hit_raw - shift
        records.append(
            StepRecord(t, x_prev, x_new, movement, hit, movement + hit, hit_raw, movement + hit_raw)
        )
        traj.append(x_new)
        shift_total += shift
    return _assemble(traj, records, shift_total)


def _assemble(traj, records, shift_total):
    return RunResult(
        trajectory=np.array(traj),
        records=records,
        total_cost=float(sum(r.total_raw for r in records)),
        total_cost_zero_min=float(sum(r.total for r in records)),
        normalization_shift=shift_total,
    )
