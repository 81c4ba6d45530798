"""Run analysis: potential traces, per-step amortized inequality checks,
competitive-ratio reports, and log-log scaling fits.

Upper-bound guarantees are validated through per-step amortized
inequalities, which hold against *any* comparator sequence, so the
numerically computed offline optimum never has to be trusted as exact.
Ratio reports state their one-sided semantics explicitly: the offline
cost is an upper bound on the optimum, hence every reported ratio is a
lower bound on the realized competitive ratio.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chasers import StepRecord, make_chaser, run_chaser
from .errors import LengthMismatch, NonPositiveData
from .functions import normalize_zero_min
from .geometry import norm
from .solvers import offline_opt, offline_opt_grid_1d

SQRT2 = float(np.sqrt(2.0))

RATIO_SEMANTICS = (
    "opt_upper_cost upper-bounds the offline optimum; "
    "ratio_lower therefore lower-bounds the realized competitive ratio"
)


@dataclass
class PotentialTrace:
    phi: np.ndarray  # (T+1,): distances including the shared start row
    dphi: np.ndarray  # (T,): per-step increments


def potential_trace(traj_alg, traj_cmp):
    """Player-comparator distance trace; trajectories include row 0."""
    traj_alg = np.atleast_2d(np.asarray(traj_alg, dtype=float))
    traj_cmp = np.atleast_2d(np.asarray(traj_cmp, dtype=float))
    if traj_alg.shape != traj_cmp.shape:
        raise LengthMismatch(
            f"trajectories have shapes {traj_alg.shape} and {traj_cmp.shape}"
        )
    phi = np.linalg.norm(traj_alg - traj_cmp, axis=1)
    return PotentialTrace(phi=phi, dphi=np.diff(phi))


def trajectory_records(instance, trajectory, p=2.0):
    """Cost ledger of an arbitrary comparator trajectory (row 0 = start),
    with hits measured on the zero-minimum normalization."""
    trajectory = np.atleast_2d(np.asarray(trajectory, dtype=float))
    if trajectory.shape[0] != instance.horizon + 1:
        raise LengthMismatch(
            f"trajectory has {trajectory.shape[0]} rows, expected {instance.horizon + 1}"
        )
    records = []
    for t, f in enumerate(instance.functions, start=1):
        x_prev = trajectory[t - 1]
        x_new = trajectory[t]
        movement = norm(x_new - x_prev, p)
        hit_raw = f.value(x_new)
        hit = hit_raw - f.min_value()
        records.append(
            StepRecord(t, x_prev, x_new, movement, hit, movement + hit, hit_raw, movement + hit_raw)
        )
    return records


def amortized_constants(kind, kappa, gamma_wc=None):
    """(a, b) pair of the per-step inequality cost_t(ALG) + a dPhi_t <= b cost_t(Y)."""
    if kind == "m2m":
        return 2.0 * SQRT2, (4.0 + 4.0 * SQRT2) * kappa
    if kind == "cobd":
        c = 2.0 * np.sqrt(2.0 * kappa)
        return c, 2.0 * (2.0 + c)
    if kind == "well-centered":
        if gamma_wc is None:
            raise ValueError("well-centered constants need the exponent")
        return 2.0 * SQRT2, (2.0 + 2.0 * SQRT2) * 2.0 ** (gamma_wc / 2.0) * kappa
    if kind == "constrained-m2m":
        return 2.0 * SQRT2, 25.0 * (2.0 + 2.0 * SQRT2) * kappa
    raise ValueError(f"unknown amortized bound kind {kind!r}")


@dataclass
class AmortizedReport:
    kind: str
    a: float
    b: float
    residuals: np.ndarray  # (T,)
    tolerances: np.ndarray  # (T,)
    passed: bool

    @property
    def worst(self):
        slack = self.residuals - self.tolerances
        return float(slack.max()) if slack.size else -np.inf


def amortized_check(records_alg, records_cmp, trace, kappa, kind, gamma_wc=None, rel_tol=1e-6):
    """Per-step residuals of the amortized inequality.

    residual_t = cost_t(ALG) + a * dPhi_t - b * cost_t(Y); the check
    passes when every residual stays below rel_tol * (1 + step scale).
    Costs are the zero-minimum-normalized ones.
    """
    if not (len(records_alg) == len(records_cmp) == trace.dphi.size):
        raise LengthMismatch("records and potential trace must cover the same steps")
    a, b = amortized_constants(kind, kappa, gamma_wc)
    alg = np.array([r.total for r in records_alg])
    cmp_ = np.array([r.total for r in records_cmp])
    residuals = alg + a * trace.dphi - b * cmp_
    tolerances = rel_tol * (1.0 + alg + b * cmp_)
    return AmortizedReport(
        kind=kind,
        a=a,
        b=b,
        residuals=residuals,
        tolerances=tolerances,
        passed=bool(np.all(residuals <= tolerances)),
    )


@dataclass
class RatioReport:
    alg_cost: float
    opt_upper_cost: float
    ratio_lower: float
    flags: list = field(default_factory=list)
    semantics: str = RATIO_SEMANTICS
    opt_method: str = ""
    run: object = None  # the chaser's RunResult, not serialized
    opt_trajectory: object = None

    def to_dict(self):
        return {
            "alg_cost": self.alg_cost,
            "opt_upper_cost": self.opt_upper_cost,
            "ratio_lower": self.ratio_lower,
            "flags": list(self.flags),
            "semantics": self.semantics,
            "opt_method": self.opt_method,
        }


def _grid_window(instance, pad=1.0):
    lows = [float(instance.start.min())]
    highs = [float(instance.start.max())]
    for f in instance.functions:
        m = f.minimizer()
        lows.append(float(m.min()))
        highs.append(float(m.max()))
    return min(lows) - pad, max(highs) + pad


def competitive_ratio(instance, chaser_kind="m2m", cfg=None, p=2.0, n_grid=4001):
    """Run a chaser, benchmark it against the offline upper bound, and
    report the (lower-bound) empirical ratio."""
    chaser = make_chaser(chaser_kind, instance.start, instance.feasible, cfg, p)
    run = run_chaser(chaser, instance)
    flags = []
    opt = offline_opt(instance, cfg, alg_trajectory=run.trajectory)
    upper = opt.cost
    method = opt.method
    if not opt.converged:
        flags.append("offline-nonconverged")
    if instance.dimension == 1:
        lo, hi = _grid_window(instance)
        grid = offline_opt_grid_1d(instance, lo, hi, n_grid)
        if grid.cost < upper:
            upper = grid.cost
            method = grid.method
    tiny = 1e-12
    if upper <= tiny:
        if run.total_cost <= tiny:
            flags.append("degenerate")
            ratio = 1.0
        else:
            flags.append("opt-zero")
            ratio = np.inf
    else:
        ratio = run.total_cost / upper
    return RatioReport(
        alg_cost=run.total_cost,
        opt_upper_cost=upper,
        ratio_lower=float(ratio),
        flags=flags,
        opt_method=method,
        run=run,
        opt_trajectory=opt.trajectory,
    )


def scaling_fit(xs, ys):
    """Least-squares slope of log y against log x, with its r^2."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size != ys.size or xs.size < 3:
        raise NonPositiveData("need at least three paired points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise NonPositiveData("log-log fit needs positive data")
    lx = np.log(xs)
    ly = np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(slope), float(r2)


def eq_objective(instance, trajectory, p=2.0):
    """Movement-plus-hit objective of a trajectory (row 0 = start)."""
    records = trajectory_records(instance, trajectory, p)
    return float(sum(r.total_raw for r in records))
