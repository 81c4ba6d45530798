"""Executable property suites.

The geometric structure disjunctions, the gradient bound, the per-step
amortized inequalities, and the dimension-reduction invariants, packaged
so both the CLI ``check`` command and the test suite drive the same
code.  Each suite returns a list of (name, passed, detail) tuples.
"""

from __future__ import annotations

import numpy as np

from .adversaries import build_lbd_schedule
from .analysis import amortized_check, potential_trace, trajectory_records
from .chasers import make_chaser, run_chaser
from .functions import Quadratic
from .geometry import Ball, WholeSpace
from .instances import (
    random_feasible_trajectory,
    random_halfspace_set,
    random_powernorm_instance,
    random_subspace_instance,
    random_wellconditioned_instance,
)
from .reduction import run_lifted
from .solvers import offline_opt


def _batch_norm(vs, p):
    if p == 2.0:
        return np.linalg.norm(vs, axis=1)
    if np.isinf(p):
        return np.abs(vs).max(axis=1)
    return (np.abs(vs) ** p).sum(axis=1) ** (1.0 / p)


def structure_lemma_violations(rng, n_trials, d, p=2.0, slack=1e-12):
    """Count of random (gamma, x, y) draws violating both branches of the
    move-or-pay disjunction.

    Euclidean branch constants are 1/sqrt(2); the general-norm variant
    uses 1/2 for the movement branch and 1/4 for the distance branch.
    """
    if p == 2.0:
        c_move = c_far = 1.0 / np.sqrt(2.0)
    else:
        c_move, c_far = 0.5, 0.25
    gamma = rng.uniform(0.0, 1.0, size=n_trials)
    scale = 10.0 ** rng.uniform(-2.0, 1.0, size=(n_trials, 1))
    x = rng.standard_normal((n_trials, d)) * scale
    y = rng.standard_normal((n_trials, d)) * scale
    gx = gamma[:, None] * x
    moved = _batch_norm(y - gx, p) - _batch_norm(y - x, p) <= -c_move * _batch_norm(x - gx, p) + slack
    far = _batch_norm(y, p) >= c_far * _batch_norm(gx, p) - slack
    return int(np.sum(~(moved | far)))


def gradient_bound_violations(rng, n_functions, points_per_function=20, slack=1e-9):
    """Violations of ||grad f(x)|| <= sqrt(2 beta f(x)) on zero-minimum
    random quadratics."""
    bad = 0
    for _ in range(n_functions):
        d = int(rng.integers(1, 12))
        eigs = 10.0 ** rng.uniform(-1.0, 1.0, size=d)
        q = np.linalg.qr(rng.standard_normal((d, d)))[0]
        f = Quadratic(q @ np.diag(eigs) @ q.T, rng.standard_normal(d))
        xs = f.center + rng.standard_normal((points_per_function, d)) * 10.0 ** rng.uniform(
            -1, 1, size=(points_per_function, 1)
        )
        for x in xs:
            if np.linalg.norm(f.gradient(x)) > np.sqrt(2.0 * f.beta * f.value(x)) + slack:
                bad += 1
    return bad


def structure_suite(seed=0, n_trials=100_000):
    rng = np.random.default_rng(seed)
    results = []
    dims = (1, 2, 5, 20)
    per_dim = n_trials // len(dims)
    bad = sum(structure_lemma_violations(rng, per_dim, d, p=2.0) for d in dims)
    results.append(("euclidean structure disjunction", bad == 0, f"{bad} violations"))
    ps = (1.0, 1.5, 3.0, np.inf)
    per_cell = n_trials // (len(dims) * len(ps))
    bad = sum(
        structure_lemma_violations(rng, per_cell, d, p=p) for d in dims for p in ps
    )
    results.append(("general-norm structure disjunction", bad == 0, f"{bad} violations"))
    return results


def gradbound_suite(seed=0, n_functions=500):
    rng = np.random.default_rng(seed)
    bad = gradient_bound_violations(rng, n_functions)
    return [("gradient bound", bad == 0, f"{bad} violations")]


def _comparators(rng, instance, n_random=5, with_offline=True, cfg=None):
    trajectories = []
    follow = make_chaser("followmin", instance.start, instance.feasible, cfg)
    trajectories.append(("follow-min", run_chaser(follow, instance).trajectory))
    if with_offline:
        opt = offline_opt(instance, cfg)
        trajectories.append(
            ("offline", np.vstack([instance.start[None, :], opt.trajectory]))
        )
    for i in range(n_random):
        trajectories.append(
            (f"random-{i}", random_feasible_trajectory(rng, instance, scale=1.5))
        )
    return trajectories


def run_amortized_battery(rng, instances, chaser_kind, bound_kind, n_random=5,
                          with_offline=True, cfg=None, gamma_wc=None):
    """Worst residual slack across instances and comparators (PASS < 0)."""
    worst = -np.inf
    for instance in instances:
        kappa = max(f.kappa for f in instance.functions)
        chaser = make_chaser(chaser_kind, instance.start, instance.feasible, cfg)
        run = run_chaser(chaser, instance)
        for _, cmp_traj in _comparators(rng, instance, n_random, with_offline, cfg):
            trace = potential_trace(run.trajectory, cmp_traj)
            records_cmp = trajectory_records(instance, cmp_traj)
            report = amortized_check(
                run.records, records_cmp, trace, kappa, bound_kind, gamma_wc=gamma_wc
            )
            worst = max(worst, report.worst)
    return worst


def amortized_suite(seed=0, n_instances=8):
    rng = np.random.default_rng(seed)
    results = []

    quad = [
        random_wellconditioned_instance(
            rng, int(rng.integers(2, 9)), int(rng.integers(2, 13)), kappa
        )
        for kappa in (1.0, 4.0, 16.0)
        for _ in range(n_instances // 2)
    ]
    worst = run_amortized_battery(rng, quad, "m2m", "m2m")
    results.append(("move-towards-minimizer inequality", worst <= 0, f"worst slack {worst:.2e}"))
    worst = run_amortized_battery(rng, quad, "cobd", "cobd")
    results.append(("balanced-descent inequality", worst <= 0, f"worst slack {worst:.2e}"))

    for exponent in (1.5, 2.0, 3.0):
        power = [
            random_powernorm_instance(rng, int(rng.integers(2, 7)), int(rng.integers(2, 9)), exponent)
            for _ in range(max(2, n_instances // 3))
        ]
        worst = run_amortized_battery(rng, power, "m2m", "well-centered", gamma_wc=exponent)
        results.append(
            (f"well-centered inequality (exponent {exponent})", worst <= 0, f"worst slack {worst:.2e}")
        )

    constrained = []
    for kappa in (4.0, 16.0):
        d = int(rng.integers(2, 6))
        constrained.append(
            random_wellconditioned_instance(
                rng, d, int(rng.integers(2, 9)), kappa, feasible=Ball(np.zeros(d), 1.0)
            )
        )
        d = int(rng.integers(2, 6))
        constrained.append(
            random_wellconditioned_instance(
                rng, d, int(rng.integers(2, 9)), kappa, feasible=random_halfspace_set(rng, d, 2)
            )
        )
    worst = run_amortized_battery(rng, constrained, "cm2m", "constrained-m2m")
    results.append(("constrained segment inequality", worst <= 0, f"worst slack {worst:.2e}"))
    worst = run_amortized_battery(rng, constrained, "cobd", "cobd")
    results.append(("constrained balanced-descent inequality", worst <= 0, f"worst slack {worst:.2e}"))
    return results


def reduction_metrics(rng, instance, k, base_kind="cobd", n_pairs=40):
    """Invariant residuals of one reduction pipeline run."""
    from .chasers import CHASER_KINDS
    from .reduction import init_reduction, place_start, reduce_request

    factory = lambda start: CHASER_KINDS[base_kind](start)
    lifted_result, lifted = run_lifted(factory, k, instance)

    containment = 0.0
    distance_err = 0.0
    fix_err = 0.0
    state = init_reduction(instance.functions[0].subspace, k, instance.dimension)
    place_start(state, instance.start, instance.functions[0].subspace)
    prev_sub = instance.functions[0].subspace
    prev_iso = state.iso
    for f in instance.functions:
        sub = f.subspace
        transformed, _ = reduce_request(state, sub, None)
        tail = np.abs(transformed.base[state.m :]).max() if state.m < instance.dimension else 0.0
        if transformed.dim:
            tail = max(tail, np.abs(transformed.basis[:, state.m :]).max(initial=0.0))
        containment = max(containment, float(tail))
        # consecutive-distance preservation on random feasible pairs
        za = rng.standard_normal((n_pairs, prev_sub.dim)) if prev_sub.dim else np.zeros((n_pairs, 0))
        zb = rng.standard_normal((n_pairs, sub.dim)) if sub.dim else np.zeros((n_pairs, 0))
        pa = prev_sub.base + za @ prev_sub.basis
        pb = sub.base + zb @ sub.basis
        lhs = np.linalg.norm(state.iso.apply(pb) - prev_iso.apply(pa), axis=1)
        rhs = np.linalg.norm(pb - pa, axis=1)
        distance_err = max(distance_err, float(np.abs(lhs - rhs).max()))
        # the new isometry agrees with the previous one on the previous request
        fix_err = max(
            fix_err, float(np.linalg.norm(state.iso.apply(pa) - prev_iso.apply(pa), axis=1).max())
        )
        prev_sub = sub
        prev_iso = state.iso

    base_total = sum(r.total_raw for r in lifted.base_records)
    cost_gap = abs(lifted_result.total_cost - base_total)
    return {
        "containment": containment,
        "distance": distance_err,
        "fixes_previous": fix_err,
        "cost_gap": cost_gap,
    }


def reduction_suite(seed=0, n_instances=6):
    rng = np.random.default_rng(seed)
    worst = {"containment": 0.0, "distance": 0.0, "fixes_previous": 0.0, "cost_gap": 0.0}
    for i in range(n_instances):
        k = 1 if i % 2 == 0 else 2
        d = 8 if i % 3 else 20
        instance = random_subspace_instance(rng, d, 12, k)
        metrics = reduction_metrics(rng, instance, k)
        for key in worst:
            worst[key] = max(worst[key], metrics[key])
    return [
        ("transformed requests stay in the reduced subspace", worst["containment"] <= 1e-8,
         f"max residual {worst['containment']:.2e}"),
        ("consecutive distances preserved", worst["distance"] <= 1e-8,
         f"max error {worst['distance']:.2e}"),
        ("new isometry fixes the previous request", worst["fixes_previous"] <= 1e-8,
         f"max error {worst['fixes_previous']:.2e}"),
        ("lifted cost equals reduced cost", worst["cost_gap"] <= 1e-6,
         f"max gap {worst['cost_gap']:.2e}"),
    ]


def adversary_suite(seed=0):
    """Smoke-level trend checks on the adaptive adversaries."""
    results = []
    for kind, (lo_exp, hi_exp) in (("m2m", (0.8, 1.5)), ("cobd", (0.35, 0.65))):
        kappas = [8.0, 27.0, 64.0]
        ratios = [build_lbd_schedule(kind, k, int(k)).ratio for k in kappas]
        from .analysis import scaling_fit

        exponent, r2 = scaling_fit(kappas, ratios)
        ok = lo_exp <= exponent and r2 >= 0.9 and exponent <= hi_exp + 1.0
        results.append(
            (f"{kind} adversary ratio trend", ok, f"exponent {exponent:.3f}, r2 {r2:.3f}")
        )
    return results


SUITES = {
    "structure": structure_suite,
    "amortized": amortized_suite,
    "gradbound": gradbound_suite,
    "reduction": reduction_suite,
    "adversary": adversary_suite,
}
