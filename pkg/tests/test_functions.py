import numpy as np
import pytest

from chasekit import (
    AffineIsometry,
    AffineSubspace,
    BlackBoxFunction,
    DimensionMismatch,
    InvalidSet,
    NotDifferentiable,
    OffSubspace,
    PowerNorm,
    Quadratic,
    SubspaceIndicator,
    conditioning,
    evaluate,
    global_minimizer,
    gradient,
    normalize_zero_min,
    sampled_conditioning_check,
)
from conftest import fd_gradient, random_quadratic


def test_quadratic_values():
    f = Quadratic(2.0 * np.eye(2), np.zeros(2))
    assert evaluate(f, [1.0, 1.0]) == pytest.approx(2.0)
    assert evaluate(f, f.minimizer()) == pytest.approx(0.0)
    g = Quadratic(np.eye(2), np.ones(2), offset=3.0)
    assert evaluate(g, g.minimizer()) == pytest.approx(3.0)


def test_quadratic_validation():
    with pytest.raises(InvalidSet):
        Quadratic(np.array([[1.0, 2.0], [0.0, 1.0]]), np.zeros(2))
    with pytest.raises(InvalidSet):
        Quadratic(np.array([[-1.0]]), np.zeros(1))
    with pytest.raises(DimensionMismatch):
        Quadratic(np.eye(2), np.zeros(3))


def test_powernorm_value():
    f = PowerNorm(1.0, 3.0, np.zeros(2))
    assert evaluate(f, [2.0, 0.0]) == pytest.approx(8.0)
    assert evaluate(f, f.minimizer()) == 0.0


def test_gradient_matches_finite_differences(rng):
    for _ in range(20):
        d = int(rng.integers(1, 7))
        f = random_quadratic(rng, d, kappa=float(rng.integers(1, 9)))
        x = rng.standard_normal(d)
        g = gradient(f, x)
        ref = fd_gradient(f, x)
        assert np.linalg.norm(g - ref) <= 1e-5 * (1.0 + np.linalg.norm(ref))
    p = PowerNorm(1.3, 2.5, rng.standard_normal(3))
    x = rng.standard_normal(3)
    assert np.linalg.norm(gradient(p, x) - fd_gradient(p, x)) < 1e-5


def test_gradient_zero_at_minimizer(rng):
    f = random_quadratic(rng, 4)
    assert np.linalg.norm(gradient(f, global_minimizer(f))) < 1e-9
    p = PowerNorm(2.0, 1.5, rng.standard_normal(4))
    assert np.linalg.norm(gradient(p, global_minimizer(p))) < 1e-9


def test_powernorm_kink():
    f = PowerNorm(1.0, 1.0, np.zeros(2))
    with pytest.raises(NotDifferentiable):
        f.gradient(np.zeros(2))


def test_subspace_indicator():
    sub = AffineSubspace([0.0, 0.0, 1.0], [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    inner = Quadratic(np.diag([2.0, 4.0]), np.array([0.5, -0.5]))
    f = SubspaceIndicator(sub, inner)
    x = sub.lift([0.5, -0.5])
    assert evaluate(f, x) == pytest.approx(0.0)
    with pytest.raises(OffSubspace):
        evaluate(f, [0.0, 0.0, 2.0])
    # lifted minimizer has zero tangent gradient
    m = global_minimizer(f)
    assert np.linalg.norm(sub.basis @ f.gradient(m)) < 1e-9
    assert sub.contains(m)


def test_normalize_zero_min(rng):
    f = Quadratic(np.eye(2), np.zeros(2), offset=5.0)
    f0 = normalize_zero_min(f)
    assert f0.min_value() == 0.0
    assert f0.alpha == f.alpha and f0.beta == f.beta
    assert np.allclose(f0.minimizer(), f.minimizer())
    assert normalize_zero_min(f0) is f0
    g = random_quadratic(rng, 3)
    g0 = normalize_zero_min(g)
    assert evaluate(g0, g0.minimizer()) == pytest.approx(0.0, abs=1e-12)


def test_conditioning():
    assert conditioning(Quadratic(np.diag([1.0, 4.0]), np.zeros(2))) == pytest.approx((1, 4, 4))
    assert conditioning(Quadratic(2.0 * np.eye(3), np.zeros(3))) == pytest.approx((2, 2, 1))
    # curvature 2*mu / 2*lam with lam=1, mu=1/8 gives (0.25, 2, 8)
    f = Quadratic(np.diag([2.0, 2.0, 0.25, 0.25]), np.zeros(4))
    assert conditioning(f) == pytest.approx((0.25, 2.0, 8.0))


def test_strong_convexity_and_smoothness(rng):
    for _ in range(10):
        d = int(rng.integers(2, 6))
        f = random_quadratic(rng, d, kappa=4.0)
        for _ in range(20):
            x = rng.standard_normal(d)
            y = rng.standard_normal(d)
            gap = f.value(y) - f.value(x) - float(f.gradient(x) @ (y - x))
            dist2 = float(np.linalg.norm(x - y)) ** 2
            assert gap >= 0.5 * f.alpha * dist2 - 1e-9
            assert gap <= 0.5 * f.beta * dist2 + 1e-9


def test_gradient_bound(rng):
    for _ in range(50):
        d = int(rng.integers(1, 8))
        f = random_quadratic(rng, d, kappa=float(rng.integers(1, 10)))
        x = f.center + 10 ** rng.uniform(-1, 1) * rng.standard_normal(d)
        assert np.linalg.norm(f.gradient(x)) <= np.sqrt(2.0 * f.beta * f.value(x)) + 1e-9


def test_well_centered_sandwich(rng):
    f = PowerNorm(0.7, 2.5, rng.standard_normal(3), kappa=3.0)
    a = f.alpha
    for _ in range(10_000):
        x = f.center + 10 ** rng.uniform(-2, 2) * rng.standard_normal(3)
        r = np.linalg.norm(x - f.center)
        v = f.value(x)
        assert 0.5 * a * r**f.exponent <= v + 1e-12
        assert v <= 0.5 * a * f.kappa * r**f.exponent + 1e-12


def test_precompose_preserves_family(rng):
    q = np.linalg.qr(rng.standard_normal((3, 3)))[0]
    iso = AffineIsometry(q, rng.standard_normal(3))
    f = random_quadratic(rng, 3)
    g = f.precompose(iso)
    x = rng.standard_normal(3)
    assert g.value(x) == pytest.approx(f.value(iso.apply(x)))
    assert np.allclose(g.gradient(x), fd_gradient(g, x), atol=1e-5)
    assert g.conditioning() == pytest.approx(f.conditioning(), rel=1e-9)


def test_blackbox_verifier(rng):
    f = BlackBoxFunction(
        lambda x: float(x @ x),
        lambda x: 2.0 * x,
        np.zeros(3),
        alpha=2.0,
        beta=2.0,
    )
    assert sampled_conditioning_check(f, rng)["ok"]
    lying = BlackBoxFunction(
        lambda x: float(x @ x),
        lambda x: 2.0 * x,
        np.zeros(3),
        alpha=10.0,
        beta=10.0,
    )
    report = sampled_conditioning_check(lying, rng)
    assert report["strong_convexity_violation"] > 0
