import numpy as np
import pytest

from chasekit import Quadratic


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def fd_gradient(f, x, h=1e-6):
    """Central finite-difference gradient, the independent oracle."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f.value(x + e) - f.value(x - e)) / (2.0 * h)
    return g


def random_quadratic(rng, d, kappa=4.0, spread=1.0):
    """Random quadratic with eigenvalues spanning exactly [a, a*kappa]."""
    alpha = 10.0 ** rng.uniform(-0.5, 0.5)
    if d == 1:
        eigs = np.array([alpha])
    else:
        eigs = np.concatenate([[alpha, alpha * kappa], rng.uniform(alpha, alpha * kappa, d - 2)])
    q = np.linalg.qr(rng.standard_normal((d, d)))[0]
    return Quadratic(q @ np.diag(eigs) @ q.T, spread * rng.standard_normal(d))
