"""Command-line harness.

Subcommands: ``run`` (one chaser on one instance), ``compare`` (adds the
offline benchmark and the ratio report), ``sweep`` (adversary families
across condition numbers), ``reduce`` (the dimension-reduction
pipeline), and ``check`` (property suites).  Reports are a CSV per run
plus a JSON summary, with matplotlib figures rendered alongside unless
``--no-plot`` is given.

Exit codes: 0 success, 1 property failure, 2 I/O or schema error,
3 solver non-convergence.  ``CHASE_SEED`` overrides seeds for
reproduction.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .adversaries import build_lbd_schedule, gen_cube_instance, preset_params
from .analysis import (
    RATIO_SEMANTICS,
    amortized_check,
    competitive_ratio,
    potential_trace,
    scaling_fit,
    trajectory_records,
)
from .chasers import make_chaser, run_chaser
from .checks import SUITES
from .errors import ChaseError, NonConvergence, SchemaError
from .instances import load_instance, save_instance
from .solvers import SolverConfig
from . import plots

BOUND_KIND_FOR_ALGO = {"m2m": "m2m", "cm2m": "constrained-m2m", "cobd": "cobd"}


def _resolve_seed(default):
    env = os.environ.get("CHASE_SEED")
    if env is not None:
        return int(env)
    return default


def _config_from_args(args):
    kwargs = {}
    if getattr(args, "tol", None) is not None:
        kwargs["tol"] = args.tol
    return SolverConfig(**kwargs)


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, default=_jsonify)
        fh.write("\n")


def _jsonify(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"cannot serialize {type(value).__name__}")


def write_run_csv(path, records, phi=None, dphi=None, residuals=None):
    """One row per step: t, coordinates, movement, hit, potential columns."""
    d = records[0].x_new.size if records else 0
    header = (
        ["t"]
        + [f"x_{i}" for i in range(d)]
        + ["movement", "hit", "hit_raw", "phi", "dphi", "residual"]
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i, rec in enumerate(records):
            row = [rec.t] + [repr(v) for v in rec.x_new]
            row += [repr(rec.movement), repr(rec.hit), repr(rec.hit_raw)]
            row.append(repr(float(phi[i + 1])) if phi is not None else "")
            row.append(repr(float(dphi[i])) if dphi is not None else "")
            row.append(repr(float(residuals[i])) if residuals is not None else "")
            writer.writerow(row)


def _ensure_out(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args):
    instance = load_instance(args.instance)
    cfg = _config_from_args(args)
    chaser = make_chaser(args.algo, instance.start, instance.feasible, cfg, p=args.norm)
    result = run_chaser(chaser, instance)
    out = _ensure_out(args)
    csv_path = out / "run.csv"
    write_run_csv(csv_path, result.records)
    summary = {
        "algo": args.algo,
        "norm": args.norm,
        "total_cost": result.total_cost,
        "total_cost_zero_min": result.total_cost_zero_min,
        "normalization_shift": result.normalization_shift,
        "steps": len(result.records),
        "final_point": result.trajectory[-1].tolist(),
    }
    _write_json(out / "summary.json", summary)
    if not args.no_plot:
        plots.plot_run(csv_path, out / "run.png", title=f"{args.algo} run")
    print(f"total cost {result.total_cost:.6g} over {len(result.records)} steps -> {out}")
    return 0


def cmd_compare(args):
    instance = load_instance(args.instance)
    cfg = _config_from_args(args)
    report = competitive_ratio(instance, args.algo, cfg, p=args.norm)
    run = report.run
    out = _ensure_out(args)

    phi = dphi = residuals = None
    bound_kind = BOUND_KIND_FOR_ALGO.get(args.algo)
    amortized = None
    opt_traj = np.vstack([instance.start[None, :], report.opt_trajectory])
    trace = potential_trace(run.trajectory, opt_traj)
    phi, dphi = trace.phi, trace.dphi
    if bound_kind is not None:
        kappa = max(f.kappa for f in instance.functions)
        if np.isfinite(kappa):
            records_cmp = trajectory_records(instance, opt_traj)
            amortized = amortized_check(run.records, records_cmp, trace, kappa, bound_kind)
            residuals = amortized.residuals

    csv_path = out / "compare.csv"
    write_run_csv(csv_path, run.records, phi=phi, dphi=dphi, residuals=residuals)
    summary = {
        "algo": args.algo,
        "ratio": report.to_dict(),
        "amortized": None
        if amortized is None
        else {
            "kind": amortized.kind,
            "passed": amortized.passed,
            "max_residual": float(amortized.residuals.max()),
        },
    }
    _write_json(out / "summary.json", summary)
    if not args.no_plot:
        plots.plot_compare(
            csv_path,
            out / "compare.png",
            alg_label=args.algo,
            opt_cost=report.opt_upper_cost,
            title="algorithm vs offline upper bound",
        )
    print(
        f"alg {report.alg_cost:.6g} / opt-upper {report.opt_upper_cost:.6g} "
        f"=> ratio lower bound {report.ratio_lower:.4g} ({RATIO_SEMANTICS})"
    )
    return 0


def cmd_sweep(args):
    kappas = [float(k) for k in args.kappas.split(",")]
    out = _ensure_out(args)
    cfg = _config_from_args(args)
    base_seed = _resolve_seed(args.seed)
    rows = []
    mean_ratios = []
    for kappa in kappas:
        if args.adversary == "cube":
            ratios = []
            for s in range(args.seeds):
                params = preset_params("kappa", kappa, seed=base_seed + s)
                instance, comparator = gen_cube_instance(params)
                report = competitive_ratio(instance, args.algo, cfg)
                upper = min(report.opt_upper_cost, comparator.cost)
                ratio = report.alg_cost / upper if upper > 0 else 1.0
                ratios.append(ratio)
                rows.append(
                    {
                        "kappa": kappa,
                        "seed": base_seed + s,
                        "alg_cost": report.alg_cost,
                        "opt_upper": upper,
                        "ratio": ratio,
                    }
                )
            mean_ratios.append(float(np.mean(ratios)))
        else:
            horizon = args.steps if args.steps else int(round(kappa))
            run = build_lbd_schedule(args.adversary, kappa, horizon, cfg)
            if run.flags:
                print(f"kappa={kappa}: {len(run.flags)} per-step check flags", file=sys.stderr)
            rows.append(
                {
                    "kappa": kappa,
                    "seed": "",
                    "alg_cost": run.alg_cost,
                    "opt_upper": run.comparator_cost,
                    "ratio": run.ratio,
                }
            )
            mean_ratios.append(run.ratio)
            save_instance(run.instance, out / f"adversary_{args.adversary}_k{kappa:g}.json")

    if len(kappas) >= 3:
        exponent, r2 = scaling_fit(kappas, mean_ratios)
    else:
        exponent = r2 = None
    csv_path = out / "sweep.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["kappa", "seed", "alg_cost", "opt_upper", "ratio"])
        writer.writeheader()
        writer.writerows(rows)
    summary = {
        "adversary": args.adversary,
        "algo": args.algo,
        "kappas": kappas,
        "mean_ratios": mean_ratios,
        "fit": None if exponent is None else {"exponent": exponent, "r2": r2},
        "seeds": args.seeds if args.adversary == "cube" else 1,
        "semantics": RATIO_SEMANTICS,
    }
    _write_json(out / "summary.json", summary)
    if not args.no_plot:
        plots.plot_sweep(
            kappas,
            mean_ratios,
            out / "sweep.png",
            exponent=exponent,
            r2=r2,
            title=f"{args.adversary} adversary sweep",
        )
    if exponent is None:
        print(f"ratios {mean_ratios} over kappas {kappas} (no fit: <3 points) -> {out}")
    else:
        print(f"fit exponent {exponent:.3f} (r2 {r2:.3f}) over kappas {kappas} -> {out}")
    return 0


def cmd_reduce(args):
    instance = load_instance(args.instance)
    cfg = _config_from_args(args)
    from .chasers import CHASER_KINDS
    from .reduction import run_lifted

    factory = lambda start: CHASER_KINDS[args.algo](start, cfg=cfg)
    result, lifted = run_lifted(factory, args.k, instance, cfg)
    base_total = sum(r.total_raw for r in lifted.base_records)
    out = _ensure_out(args)
    write_run_csv(out / "lifted.csv", result.records)
    write_run_csv(out / "base.csv", lifted.base_records)
    gap = abs(result.total_cost - base_total)
    summary = {
        "algo": args.algo,
        "k": args.k,
        "reduced_dimension": lifted.state.m,
        "lifted_cost": result.total_cost,
        "base_cost": base_total,
        "cost_gap": gap,
    }
    _write_json(out / "summary.json", summary)
    if not args.no_plot:
        plots.plot_run(out / "lifted.csv", out / "lifted.png", title="lifted run")
    print(
        f"lifted cost {result.total_cost:.6g} vs reduced-space cost {base_total:.6g} "
        f"(gap {gap:.2e}) -> {out}"
    )
    return 0


def cmd_check(args):
    seed = _resolve_seed(args.seed)
    suites = list(SUITES) if args.suite == "all" else [args.suite]
    failures = 0
    for name in suites:
        for prop_name, passed, detail in SUITES[name](seed=seed):
            status = "PASS" if passed else "FAIL"
            print(f"{status}  [{name}] {prop_name}: {detail}")
            failures += 0 if passed else 1
    return 0 if failures == 0 else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="chase",
        description="Convex function chasing: run chasers, benchmark them, "
        "generate adversarial instances, and check the per-step guarantees.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_out=True):
        p.add_argument("--tol", type=float, default=None, help="solver tolerance")
        p.add_argument("--no-plot", action="store_true", help="skip figure rendering")
        if with_out:
            p.add_argument("--out", default="chase-out", help="output directory")

    p_run = sub.add_parser("run", help="run one chaser on one instance")
    p_run.add_argument("--instance", required=True)
    p_run.add_argument("--algo", required=True, choices=["m2m", "cm2m", "cobd", "followmin"])
    p_run.add_argument("--norm", type=float, default=2.0, help="movement norm exponent (m2m only)")
    add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="run a chaser and the offline benchmark")
    p_cmp.add_argument("--instance", required=True)
    p_cmp.add_argument("--algo", required=True, choices=["m2m", "cm2m", "cobd", "followmin"])
    p_cmp.add_argument("--norm", type=float, default=2.0)
    add_common(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    p_sweep = sub.add_parser("sweep", help="lower-bound adversary sweeps")
    p_sweep.add_argument("--adversary", required=True, choices=["cube", "m2m", "cobd"])
    p_sweep.add_argument("--kappas", default="8,27,64,125")
    p_sweep.add_argument("--seeds", type=int, default=20, help="seeds per kappa (cube only)")
    p_sweep.add_argument("--seed", type=int, default=0, help="base seed")
    p_sweep.add_argument("--steps", type=int, default=0, help="adaptive horizon (default kappa)")
    p_sweep.add_argument("--algo", default="cobd", choices=["m2m", "cm2m", "cobd", "followmin"])
    add_common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_red = sub.add_parser("reduce", help="dimension-reduction pipeline")
    p_red.add_argument("--instance", required=True)
    p_red.add_argument("--k", type=int, required=True)
    p_red.add_argument("--algo", default="cobd", choices=["m2m", "cm2m", "cobd", "followmin"])
    add_common(p_red)
    p_red.set_defaults(func=cmd_reduce)

    p_check = sub.add_parser("check", help="property suites")
    p_check.add_argument(
        "--suite",
        default="all",
        choices=["all"] + sorted(SUITES),
    )
    p_check.add_argument("--seed", type=int, default=0)
    p_check.set_defaults(func=cmd_check)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as err:
        print(f"schema error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return 2
    except NonConvergence as err:
        print(f"solver failed to converge: {err}", file=sys.stderr)
        return 3
    except ChaseError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
