"""Acceptance suite.

One test per acceptance criterion; each prints a PASS/FAIL line with the
measured margin so the whole gate is auditable from the pytest -s output.
"""

import time

import numpy as np
import pytest

from chasekit import (
    Ball,
    Instance,
    Quadratic,
    WholeSpace,
    amortized_check,
    cobd_step,
    m2m_step,
    make_chaser,
    offline_opt,
    offline_opt_grid_1d,
    potential_trace,
    run_chaser,
    scaling_fit,
    trajectory_records,
)
from chasekit.adversaries import build_lbd_schedule, gen_cube_instance, preset_params
from chasekit.checks import (
    gradient_bound_violations,
    reduction_metrics,
    structure_lemma_violations,
)
from chasekit.instances import (
    random_feasible_trajectory,
    random_halfspace_set,
    random_powernorm_instance,
    random_subspace_instance,
    random_wellconditioned_instance,
)

SEED = 20240

def _report(name, passed, detail):
    print(f"\n{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    assert passed, f"{name}: {detail}"


# ---------------------------------------------------------------------------
# shared batteries (built once per module)


@pytest.fixture(scope="module")
def quad_battery():
    rng = np.random.default_rng(SEED)
    instances = []
    for i in range(200):
        kappa = (1.0, 4.0, 16.0)[i % 3]
        d = int(rng.integers(2, 21))
        horizon = int(rng.integers(1, 31))
        instances.append(random_wellconditioned_instance(rng, d, horizon, kappa))
    return instances


@pytest.fixture(scope="module")
def m2m_runs(quad_battery):
    start = time.time()
    runs = [run_chaser(make_chaser("m2m", inst.start), inst) for inst in quad_battery]
    return runs, time.time() - start


@pytest.fixture(scope="module")
def comparator_bundles(quad_battery, m2m_runs):
    """Per instance: offline-upper trajectory, follow-min trajectory, and
    ten random feasible trajectories (all including the start row)."""
    runs, _ = m2m_runs
    rng = np.random.default_rng(SEED + 1)
    bundles = []
    for inst, run in zip(quad_battery, runs):
        opt = offline_opt(inst, alg_trajectory=run.trajectory)
        trajs = [np.vstack([inst.start[None, :], opt.trajectory])]
        trajs.append(run_chaser(make_chaser("followmin", inst.start), inst).trajectory)
        for _ in range(10):
            trajs.append(random_feasible_trajectory(rng, inst, scale=1.5))
        bundles.append(trajs)
    return bundles


@pytest.fixture(scope="module")
def constrained_battery():
    rng = np.random.default_rng(SEED + 2)
    instances = []
    for kappa in (4.0, 16.0):
        for _ in range(8):
            d = int(rng.integers(2, 7))
            horizon = int(rng.integers(2, 13))
            instances.append(
                random_wellconditioned_instance(
                    rng, d, horizon, kappa, feasible=Ball(np.zeros(d), 1.0)
                )
            )
        for _ in range(7):
            d = int(rng.integers(2, 6))
            horizon = int(rng.integers(2, 13))
            instances.append(
                random_wellconditioned_instance(
                    rng, d, horizon, kappa, feasible=random_halfspace_set(rng, d, 2)
                )
            )
    return instances


def _worst_amortized_slack(instances, runs, bundles, bound_kind, gamma_wc=None):
    worst = -np.inf
    violations = 0
    for inst, run, trajs in zip(instances, runs, bundles):
        kappa = max(f.kappa for f in inst.functions)
        for traj in trajs:
            trace = potential_trace(run.trajectory, traj)
            records_cmp = trajectory_records(inst, traj)
            report = amortized_check(
                run.records, records_cmp, trace, kappa, bound_kind, gamma_wc=gamma_wc
            )
            worst = max(worst, report.worst)
            if not report.passed:
                violations += int(np.sum(report.residuals > report.tolerances))
    return worst, violations


def _fresh_bundles(instances, runs, seed, n_random=10):
    rng = np.random.default_rng(seed)
    bundles = []
    for inst, run in zip(instances, runs):
        opt = offline_opt(inst, alg_trajectory=run.trajectory)
        trajs = [np.vstack([inst.start[None, :], opt.trajectory])]
        trajs.append(run_chaser(make_chaser("followmin", inst.start, inst.feasible), inst).trajectory)
        for _ in range(n_random):
            trajs.append(random_feasible_trajectory(rng, inst, scale=1.5))
        bundles.append(trajs)
    return bundles


# ---------------------------------------------------------------------------
# criteria


def test_criterion_1_m2m_step_identity(quad_battery, m2m_runs):
    runs, elapsed = m2m_runs
    worst = 0.0
    for run in runs:
        for rec in run.records:
            worst = max(worst, abs(rec.movement - rec.hit), abs(rec.total - 2.0 * rec.hit))
    _report(
        "criterion 1 (step identity)",
        worst <= 1e-7 and elapsed < 10.0,
        f"max |movement-hit| and |total-2*hit| = {worst:.2e}, stepping time {elapsed:.2f}s",
    )


def test_criterion_2_m2m_amortized(quad_battery, m2m_runs, comparator_bundles):
    runs, _ = m2m_runs
    worst, violations = _worst_amortized_slack(quad_battery, runs, comparator_bundles, "m2m")
    _report(
        "criterion 2 (segment-chaser amortized inequality)",
        violations == 0,
        f"{violations} violations, worst slack {worst:.2e}",
    )


def test_criterion_3_cobd_amortized(quad_battery, comparator_bundles, constrained_battery):
    runs = [run_chaser(make_chaser("cobd", inst.start), inst) for inst in quad_battery]
    worst_u, viol_u = _worst_amortized_slack(quad_battery, runs, comparator_bundles, "cobd")
    c_runs = [
        run_chaser(make_chaser("cobd", inst.start, inst.feasible), inst)
        for inst in constrained_battery
    ]
    c_bundles = _fresh_bundles(constrained_battery, c_runs, SEED + 3)
    worst_c, viol_c = _worst_amortized_slack(constrained_battery, c_runs, c_bundles, "cobd")
    _report(
        "criterion 3 (balanced-descent amortized inequality)",
        viol_u + viol_c == 0,
        f"{viol_u + viol_c} violations, worst slack unconstrained {worst_u:.2e}, "
        f"constrained {worst_c:.2e}",
    )


def test_criterion_4_wellcentered_and_constrained(constrained_battery):
    rng = np.random.default_rng(SEED + 4)
    worst_exponents = {}
    total_violations = 0
    for exponent in (1.5, 2.0, 3.0):
        instances = [
            random_powernorm_instance(
                rng, int(rng.integers(2, 7)), int(rng.integers(2, 13)), exponent,
                kappa=float(rng.choice([1.0, 2.0])),
            )
            for _ in range(10)
        ]
        runs = [run_chaser(make_chaser("m2m", inst.start), inst) for inst in instances]
        bundles = _fresh_bundles(instances, runs, SEED + 5)
        worst, violations = _worst_amortized_slack(
            instances, runs, bundles, "well-centered", gamma_wc=exponent
        )
        worst_exponents[exponent] = worst
        total_violations += violations

    c_runs = [
        run_chaser(make_chaser("cm2m", inst.start, inst.feasible), inst)
        for inst in constrained_battery
    ]
    c_bundles = _fresh_bundles(constrained_battery, c_runs, SEED + 6)
    worst_c, viol_c = _worst_amortized_slack(
        constrained_battery, c_runs, c_bundles, "constrained-m2m"
    )
    total_violations += viol_c
    _report(
        "criterion 4 (well-centered and constrained segment inequalities)",
        total_violations == 0,
        f"{total_violations} violations; worst slack per exponent "
        + ", ".join(f"{k}: {v:.1e}" for k, v in worst_exponents.items())
        + f"; constrained {worst_c:.1e}",
    )


def test_criterion_5_structure_lemmas():
    rng = np.random.default_rng(SEED + 7)
    start = time.time()
    dims = (1, 2, 5, 20)
    bad_euclid = sum(structure_lemma_violations(rng, 25_000, d, p=2.0) for d in dims)
    ps = (1.0, 1.5, 3.0, np.inf)
    bad_general = sum(
        structure_lemma_violations(rng, 6_250, d, p=p) for d in dims for p in ps
    )
    elapsed = time.time() - start
    _report(
        "criterion 5 (structure disjunctions)",
        bad_euclid == 0 and bad_general == 0 and elapsed < 5.0,
        f"euclidean violations {bad_euclid}/100000, general-norm {bad_general}/100000, "
        f"time {elapsed:.2f}s",
    )


def test_criterion_6_gradient_bound():
    rng = np.random.default_rng(SEED + 8)
    bad = gradient_bound_violations(rng, 500, points_per_function=20)
    _report("criterion 6 (gradient bound)", bad == 0, f"{bad} violations in 10000 samples")


def test_criterion_7_dimension_reduction():
    rng = np.random.default_rng(SEED + 9)
    start = time.time()
    worst = {"containment": 0.0, "distance": 0.0, "cost_gap": 0.0}
    cases = [(1, 8, 20), (1, 50, 10), (2, 8, 15), (2, 50, 5)]
    count = 0
    for k, d, n in cases:
        for i in range(n):
            inst = random_subspace_instance(rng, d, 20, k)
            base = "cobd" if i % 2 == 0 else "m2m"
            metrics = reduction_metrics(rng, inst, k, base_kind=base, n_pairs=100)
            for key in worst:
                worst[key] = max(worst[key], metrics[key])
            count += 1
    elapsed = time.time() - start
    passed = (
        count == 50
        and worst["containment"] <= 1e-8
        and worst["distance"] <= 1e-8
        and worst["cost_gap"] <= 1e-6
        and elapsed < 30.0
    )
    _report(
        "criterion 7 (dimension reduction)",
        passed,
        f"{count} instances; containment {worst['containment']:.1e}, "
        f"distance {worst['distance']:.1e}, cost gap {worst['cost_gap']:.1e}, "
        f"time {elapsed:.1f}s",
    )


def test_criterion_8_lower_bound_trends():
    start = time.time()
    kappas = [8.0, 27.0, 64.0, 125.0]

    m2m_ratios = [build_lbd_schedule("m2m", k, int(k)).ratio for k in kappas]
    m2m_exp, m2m_r2 = scaling_fit(kappas, m2m_ratios)

    cobd_ratios = [build_lbd_schedule("cobd", k, int(k)).ratio for k in kappas]
    cobd_exp, cobd_r2 = scaling_fit(kappas, cobd_ratios)

    cube_means = []
    for kappa in kappas:
        ratios = []
        for s in range(20):
            params = preset_params("kappa", kappa, seed=SEED + s)
            inst, comparator = gen_cube_instance(params)
            run = run_chaser(make_chaser("cobd", inst.start), inst)
            opt = offline_opt(inst, alg_trajectory=run.trajectory)
            upper = min(opt.cost, comparator.cost)
            ratios.append(run.total_cost / upper)
        cube_means.append(float(np.mean(ratios)))
    cube_exp, cube_r2 = scaling_fit(kappas, cube_means)
    cube_monotone = all(a < b for a, b in zip(cube_means, cube_means[1:]))
    elapsed = time.time() - start

    passed = (
        m2m_exp >= 0.8
        and m2m_r2 >= 0.9
        and 0.35 <= cobd_exp <= 0.65
        and cobd_r2 >= 0.9
        and cube_monotone
        and cube_exp >= 0.2
        and elapsed < 300.0
    )
    _report(
        "criterion 8 (lower-bound trends)",
        passed,
        f"segment-adversary exp {m2m_exp:.3f} (r2 {m2m_r2:.3f}); "
        f"descent-adversary exp {cobd_exp:.3f} (r2 {cobd_r2:.3f}); "
        f"cube means {['%.3f' % m for m in cube_means]} exp {cube_exp:.3f} "
        f"(r2 {cube_r2:.3f}); time {elapsed:.0f}s",
    )


def test_criterion_9_offline_oracle_agreement():
    rng = np.random.default_rng(SEED + 10)
    spacing = 4.0 / 4000.0
    worst = 0.0
    for _ in range(100):
        horizon = int(rng.integers(1, 7))
        functions = [
            Quadratic([2.0 * 10 ** rng.uniform(-0.3, 0.6)], [rng.uniform(-1.0, 1.0)])
            for _ in range(horizon)
        ]
        inst = Instance(1, [rng.uniform(-1.0, 1.0)], WholeSpace(), functions)
        dp = offline_opt_grid_1d(inst, -2.0, 2.0, 4001)
        sd = offline_opt(inst)
        worst = max(worst, abs(sd.cost - dp.cost))
    _report(
        "criterion 9 (offline oracle agreement)",
        worst <= spacing + 1e-4,
        f"max |smoothed-descent - grid-dp| = {worst:.2e} (allowed {spacing + 1e-4:.2e})",
    )


def test_criterion_10_cube_bookkeeping():
    lam = 1.0
    gamma = 1.0
    floor = gamma - 1.0 / (4.0 * lam)
    per_step = {"m2m": [], "cobd": []}
    bound_ok = True
    for seed in range(100):
        params = preset_params("kappa", 8.0, seed=SEED + seed)
        assert (params.d, params.lam, params.mu) == (4, 1.0, 0.125)
        inst, comparator = gen_cube_instance(params)
        bound_ok = bound_ok and comparator.cost <= comparator.bound + 1e-12
        for kind in ("m2m", "cobd"):
            run = run_chaser(make_chaser(kind, inst.start), inst)
            per_step[kind].append(run.total_cost / params.d)
    details = []
    passed = bound_ok
    for kind, samples in per_step.items():
        samples = np.array(samples)
        sem = samples.std(ddof=1) / np.sqrt(samples.size)
        ok = samples.mean() >= floor - 3.0 * sem
        passed = passed and ok
        details.append(f"{kind} mean {samples.mean():.3f} (floor {floor} - 3*{sem:.1e})")
    _report(
        "criterion 10 (hypercube bookkeeping)",
        passed,
        f"comparator bounds hold: {bound_ok}; " + "; ".join(details),
    )


def test_criterion_11_frozen_fixtures():
    golden = (np.sqrt(5.0) - 1.0) / 2.0
    f1 = Quadratic([2.0], [0.0])
    x = m2m_step(np.array([1.0]), f1)
    m2m_err = abs(x[0] - 0.6180340)

    inst = Instance(1, [1.0], WholeSpace(), [f1])
    opt = offline_opt(inst)
    opt_err = abs(opt.cost - 0.75)

    # recompute the balanced point of x1^2 + 4 x2^2 from (1, 1) with the
    # independent Lagrangian parametrization x(eta) = (eta/(1+eta), eta/(4+eta)),
    # bisecting eta until hit cost equals movement, before matching the step
    f2 = Quadratic(np.diag([2.0, 8.0]), np.zeros(2))
    x_prev = np.array([1.0, 1.0])

    def balance_gap(eta):
        pt = np.array([eta / (1.0 + eta), eta / (4.0 + eta)])
        return f2.value(pt) - np.linalg.norm(pt - x_prev)

    lo, hi = 1e-6, 1e6
    for _ in range(200):
        eta = np.sqrt(lo * hi)
        if balance_gap(eta) > 0:
            hi = eta
        else:
            lo = eta
    eta = np.sqrt(lo * hi)
    oracle_point = np.array([eta / (1.0 + eta), eta / (4.0 + eta)])
    stepped = cobd_step(x_prev, f2, WholeSpace())
    cobd_err = float(np.max(np.abs(stepped - oracle_point)))

    passed = m2m_err <= 1e-6 and opt_err <= 1e-6 and cobd_err <= 1e-4
    _report(
        "criterion 11 (frozen fixtures)",
        passed,
        f"segment step err {m2m_err:.2e} (vs {golden:.7f}), offline err {opt_err:.2e}, "
        f"balanced 2-d fixture err {cobd_err:.2e} at point {oracle_point.round(6)}",
    )
