import json
import os

import numpy as np
import pytest

from chasekit import (
    Ball,
    Instance,
    LengthMismatch,
    NonPositiveData,
    Quadratic,
    SchemaError,
    WholeSpace,
    amortized_check,
    amortized_constants,
    competitive_ratio,
    load_instance,
    potential_trace,
    run_chaser,
    save_instance,
    scaling_fit,
    trajectory_records,
    make_chaser,
)
from chasekit.cli import main
from chasekit.instances import random_wellconditioned_instance
from conftest import random_quadratic

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def small_instance():
    return Instance(1, [1.0], WholeSpace(), [Quadratic([2.0], [0.0])], {"seed": 7})


def test_save_load_roundtrip(tmp_path, rng):
    inst = random_wellconditioned_instance(rng, 3, 4, 4.0, feasible=Ball(np.zeros(3), 2.0))
    path = tmp_path / "inst.json"
    save_instance(inst, path)
    loaded = load_instance(path)
    again = tmp_path / "inst2.json"
    save_instance(loaded, again)
    assert path.read_text() == again.read_text()
    assert loaded.horizon == inst.horizon
    assert np.allclose(loaded.start, inst.start)
    for a, b in zip(loaded.functions, inst.functions):
        assert np.array_equal(a.hessian, b.hessian)
        assert np.array_equal(a.center, b.center)


def test_minimal_instance_file(tmp_path):
    payload = {
        "dimension": 1,
        "start": [1.0],
        "feasible_set": {"type": "whole"},
        "functions": [{"type": "quadratic", "hessian": [2.0], "center": [0.0]}],
        "metadata": {},
    }
    path = tmp_path / "minimal.json"
    path.write_text(json.dumps(payload))
    inst = load_instance(path)
    assert inst.horizon == 1
    assert inst.functions[0].value(np.array([1.0])) == pytest.approx(1.0)


def test_schema_error_names_field(tmp_path):
    payload = {
        "dimension": 2,
        "start": [0.0, 0.0],
        "feasible_set": {"type": "ball", "center": [0.0, 0.0], "radius": -1.0},
        "functions": [],
        "metadata": {},
    }
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(payload))
    with pytest.raises(SchemaError) as err:
        load_instance(path)
    assert "feasible_set" in str(err.value)

    payload["feasible_set"] = {"type": "whole"}
    payload["functions"] = [{"type": "quadratic", "hessian": [[1.0, 0.0], [0.0, 1.0]]}]
    path.write_text(json.dumps(payload))
    with pytest.raises(SchemaError) as err:
        load_instance(path)
    assert "functions[0]" in str(err.value)


def test_potential_trace():
    a = np.zeros((4, 2))
    assert np.all(potential_trace(a, a).phi == 0.0)
    b = a.copy()
    b[1:, 0] = 1.0
    trace = potential_trace(a, b)
    assert np.allclose(trace.phi, [0.0, 1.0, 1.0, 1.0])
    assert np.allclose(trace.dphi, [1.0, 0.0, 0.0])
    with pytest.raises(LengthMismatch):
        potential_trace(a, b[:-1])


def test_amortized_constants_table():
    a, b = amortized_constants("m2m", 4.0)
    assert a == pytest.approx(2.0 * np.sqrt(2.0))
    assert b == pytest.approx((4.0 + 4.0 * np.sqrt(2.0)) * 4.0)
    a, b = amortized_constants("cobd", 8.0)
    assert a == pytest.approx(8.0)
    assert b == pytest.approx(2.0 * (2.0 + 8.0))
    a, b = amortized_constants("well-centered", 2.0, gamma_wc=3.0)
    assert b == pytest.approx((2.0 + 2.0 * np.sqrt(2.0)) * 2.0 ** 1.5 * 2.0)
    a, b = amortized_constants("constrained-m2m", 1.0)
    assert b == pytest.approx(25.0 * (2.0 + 2.0 * np.sqrt(2.0)))


def test_amortized_self_comparator(rng):
    inst = random_wellconditioned_instance(rng, 3, 6, 4.0)
    run = run_chaser(make_chaser("m2m", inst.start), inst)
    trace = potential_trace(run.trajectory, run.trajectory)
    report = amortized_check(run.records, run.records, trace, 4.0, "m2m")
    # with Y = ALG the potential never moves and b >= 1, so residuals <= 0
    assert report.passed
    assert np.all(report.residuals <= 1e-12)


def test_ratio_fixture():
    report = competitive_ratio(small_instance(), "m2m")
    assert report.alg_cost == pytest.approx(2.0 * (1.0 - GOLDEN), abs=1e-6)
    assert report.opt_upper_cost == pytest.approx(0.75, abs=1e-6)
    assert report.ratio_lower == pytest.approx(1.0186, abs=1e-3)
    assert "lower-bounds" in report.semantics


def test_ratio_degenerate_flag():
    inst = Instance(1, [0.0], WholeSpace(), [Quadratic([2.0], [0.0])])
    report = competitive_ratio(inst, "m2m")
    assert report.ratio_lower == 1.0
    assert "degenerate" in report.flags


def test_trajectory_records_costs(rng):
    inst = random_wellconditioned_instance(rng, 2, 3, 1.0)
    traj = np.vstack([inst.start[None, :], rng.standard_normal((3, 2))])
    records = trajectory_records(inst, traj)
    for t, rec in enumerate(records, start=1):
        assert rec.movement == pytest.approx(np.linalg.norm(traj[t] - traj[t - 1]))
        assert rec.hit_raw == pytest.approx(inst.functions[t - 1].value(traj[t]))
    with pytest.raises(LengthMismatch):
        trajectory_records(inst, traj[:-1])


def test_scaling_fit():
    xs = np.array([8.0, 27.0, 64.0, 125.0])
    exp, r2 = scaling_fit(xs, 3.0 * xs)
    assert exp == pytest.approx(1.0, abs=1e-12)
    assert r2 == pytest.approx(1.0)
    exp, r2 = scaling_fit(xs, 0.5 * np.sqrt(xs))
    assert exp == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(NonPositiveData):
        scaling_fit([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(NonPositiveData):
        scaling_fit([1.0, 2.0, 3.0], [1.0, -2.0, 3.0])


# ---------------------------------------------------------------------------
# CLI


def test_cli_run_and_compare(tmp_path):
    inst_path = tmp_path / "inst.json"
    save_instance(small_instance(), inst_path)
    out = tmp_path / "out"
    code = main(["run", "--instance", str(inst_path), "--algo", "m2m", "--out", str(out)])
    assert code == 0
    assert (out / "run.csv").exists()
    assert (out / "summary.json").exists()
    assert (out / "run.png").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert summary["total_cost"] == pytest.approx(2.0 * (1.0 - GOLDEN), abs=1e-6)

    out2 = tmp_path / "cmp"
    code = main(["compare", "--instance", str(inst_path), "--algo", "cobd", "--out", str(out2)])
    assert code == 0
    summary = json.loads((out2 / "summary.json").read_text())
    assert summary["ratio"]["opt_upper_cost"] == pytest.approx(0.75, abs=1e-4)
    assert summary["amortized"]["passed"]
    assert (out2 / "compare.png").exists()


def test_cli_schema_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", "--instance", str(bad), "--algo", "m2m", "--out", str(tmp_path / "o")]) == 2
    missing = tmp_path / "missing.json"
    assert (
        main(["run", "--instance", str(missing), "--algo", "m2m", "--out", str(tmp_path / "o")])
        == 2
    )


def test_cli_sweep_adaptive(tmp_path):
    out = tmp_path / "sweep"
    code = main(
        [
            "sweep",
            "--adversary",
            "m2m",
            "--kappas",
            "8,27,64",
            "--out",
            str(out),
            "--no-plot",
        ]
    )
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["fit"]["exponent"] > 0.8
    assert (out / "sweep.csv").exists()
    # realized instances are saved for replay
    assert (out / "adversary_m2m_k8.json").exists()


def test_cli_sweep_cube_seed_env(tmp_path, monkeypatch):
    out = tmp_path / "cube"
    monkeypatch.setenv("CHASE_SEED", "123")
    code = main(
        [
            "sweep",
            "--adversary",
            "cube",
            "--kappas",
            "8,27,64",
            "--seeds",
            "2",
            "--algo",
            "cobd",
            "--out",
            str(out),
            "--no-plot",
        ]
    )
    assert code == 0
    rows = (out / "sweep.csv").read_text().strip().splitlines()
    assert rows[1].split(",")[1] == "123"  # env var overrode the base seed


def test_cli_reduce(tmp_path, rng):
    from chasekit.instances import random_subspace_instance

    inst = random_subspace_instance(rng, 8, 6, 1)
    path = tmp_path / "sub.json"
    save_instance(inst, path)
    out = tmp_path / "red"
    code = main(
        ["reduce", "--instance", str(path), "--k", "1", "--algo", "cobd", "--out", str(out)]
    )
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["cost_gap"] < 1e-6
    assert summary["reduced_dimension"] == 3


def test_cli_check_structure():
    assert main(["check", "--suite", "structure"]) == 0


def test_cli_check_gradbound():
    assert main(["check", "--suite", "gradbound"]) == 0
