"""Lower-bound instance generators.

Three constructions: an oblivious random-sign hypercube instance built
from diagonal quadratics, and two adaptive adversaries (one tuned
against move-towards-minimizer, one against balanced descent) that pick
each request from the player's current position.  Adaptive runs record
the realized function sequence so they replay as static instances.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateState, InvalidMode, InvalidSet, RootNotBracketed
from .functions import Quadratic
from .geometry import AffineIsometry, WholeSpace, as_point
from .instances import Instance
from .solvers import DEFAULT_CONFIG


@dataclass
class CubeParams:
    d: int
    gamma_lb: float
    lam: float
    mu: float
    seed: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise InvalidSet("dimension must be at least 1")
        if self.gamma_lb <= 0:
            raise InvalidSet("gamma must be positive")
        if not (self.lam >= self.mu >= 0.0) or self.lam <= 0:
            raise InvalidSet("need lam >= mu >= 0 and lam > 0")

    @property
    def kappa(self):
        # mu = 0 degenerates to smooth-only requests
        return self.lam / self.mu if self.mu > 0 else np.inf


@dataclass
class CubeComparator:
    """The move-to-the-corner-and-stay candidate and its cost."""

    trajectory: np.ndarray  # (d+1, d) including the start row
    cost: float
    bound: float  # gamma (1 + mu d^{3/2} gamma) sqrt(d)


def gen_cube_instance(params: CubeParams, epsilons=None):
    """Hypercube instance: request t pins the first t coordinates to
    gamma * eps with curvature 2*lam and keeps the remaining coordinates
    near zero with curvature 2*mu.

    Returns the instance together with its candidate comparator.
    """
    d, g, lam, mu = params.d, params.gamma_lb, params.lam, params.mu
    rng = np.random.default_rng(params.seed)
    if epsilons is None:
        epsilons = rng.choice([-1.0, 1.0], size=d)
    epsilons = as_point(epsilons)
    if epsilons.size != d or not np.all(np.abs(epsilons) == 1.0):
        raise InvalidSet("epsilons must be a length-d sign vector")

    functions = []
    for t in range(1, d + 1):
        diag = np.concatenate([np.full(t, 2.0 * lam), np.full(d - t, 2.0 * mu)])
        center = np.concatenate([g * epsilons[:t], np.zeros(d - t)])
        functions.append(Quadratic(diag, center))

    corner = g * epsilons
    traj = np.vstack([np.zeros(d), np.tile(corner, (d, 1))])
    hits = np.array([mu * (d - t) * g * g for t in range(1, d + 1)])
    cost = float(g * np.sqrt(d) + hits.sum())
    bound = float(g * (1.0 + mu * d**1.5 * g) * np.sqrt(d))
    comparator = CubeComparator(trajectory=traj, cost=cost, bound=bound)

    instance = Instance(
        d,
        np.zeros(d),
        WholeSpace(),
        functions,
        {
            "adversary": "cube",
            "seed": params.seed,
            "epsilons": epsilons.tolist(),
            "gamma_lb": g,
            "lam": lam,
            "mu": mu,
            "kappa": params.kappa if np.isfinite(params.kappa) else None,
            "comparator_cost": cost,
            "comparator_bound": bound,
        },
    )
    return instance, comparator


def preset_params(mode, value, d_override=None, seed=0):
    """Parameter recipes for the hypercube instance.

    kappa mode: d = round(kappa^{2/3}), gamma = lam = 1, mu = 1/kappa
    (sweeps use perfect-cube kappas so d is exact).
    alpha mode: mu = alpha/2, gamma = 1/(d^{3/2} alpha), lam = d^{3/2} alpha.
    beta mode: lam = beta/2, gamma = 1/beta, mu = 0.
    """
    if value <= 0:
        raise InvalidSet("preset value must be positive")
    if mode == "kappa":
        d = int(round(value ** (2.0 / 3.0))) if d_override is None else int(d_override)
        return CubeParams(d=d, gamma_lb=1.0, lam=1.0, mu=1.0 / value, seed=seed)
    if mode == "alpha":
        if d_override is None:
            raise InvalidMode("alpha mode needs an explicit dimension")
        d = int(d_override)
        gamma = 1.0 / (d**1.5 * value)
        return CubeParams(d=d, gamma_lb=gamma, lam=1.0 / gamma, mu=value / 2.0, seed=seed)
    if mode == "beta":
        if d_override is None:
            raise InvalidMode("beta mode needs an explicit dimension")
        return CubeParams(
            d=int(d_override), gamma_lb=1.0 / value, lam=value / 2.0, mu=0.0, seed=seed
        )
    raise InvalidMode(f"unknown preset mode {mode!r}")


# ---------------------------------------------------------------------------
# adaptive adversaries (2-dimensional constructions)


@dataclass
class AdaptiveAdversaryState:
    y: np.ndarray  # comparator position
    kappa: float
    t: int = 0
    comparator_cost: float = 0.0

    def __post_init__(self):
        self.y = as_point(self.y)


def _isometry_mapping_pair(p_src, q_src, p_dst, q_dst):
    """2-d rotation + translation taking p_src -> p_dst and q_src -> q_dst
    (the two pairs must be equidistant)."""
    p_src, q_src, p_dst, q_dst = map(as_point, (p_src, q_src, p_dst, q_dst))
    u = q_src - p_src
    v = q_dst - p_dst
    du = float(np.linalg.norm(u))
    dv = float(np.linalg.norm(v))
    if abs(du - dv) > 1e-9 * (1.0 + du):
        raise InvalidSet("pair distances differ; no isometry exists")
    u = u / du
    v = v / dv
    c = float(u @ v)
    s = float(u[0] * v[1] - u[1] * v[0])
    q = np.array([[c, -s], [s, c]])
    return AffineIsometry(q, p_dst - q @ p_src)


def m2m_adversary_step(x_prev, state: AdaptiveAdversaryState):
    """One adaptive request against move-towards-minimizer.

    Rescales the canonical configuration (x at (g, g), comparator at
    (2g, 0), request (1/(4g)) (x1^2/kappa + x2^2)) to the current
    player/comparator distance and conjugates it back by the matching
    isometry.  The comparator stays put.
    """
    x_prev = as_point(x_prev)
    dist = float(np.linalg.norm(x_prev - state.y))
    if dist <= 1e-12 * (1.0 + float(np.linalg.norm(x_prev))):
        raise DegenerateState("adversary needs the player and comparator apart")
    g = dist / np.sqrt(2.0)
    kappa = state.kappa
    to_canonical = _isometry_mapping_pair(
        x_prev, state.y, np.array([g, g]), np.array([2.0 * g, 0.0])
    )
    canonical = Quadratic(np.array([1.0 / (2.0 * g * kappa), 1.0 / (2.0 * g)]), np.zeros(2))
    f = canonical.precompose(to_canonical)
    y_t = state.y.copy()
    new_state = replace(
        state, t=state.t + 1, comparator_cost=state.comparator_cost + f.value(y_t)
    )
    return f, y_t, new_state


def cobd_adversary_step(x_prev, state: AdaptiveAdversaryState, cfg=None):
    """One adaptive request against balanced descent.

    Canonical request alpha (x1^2 + kappa x2^2) with the comparator at
    the origin; alpha is chosen by bisection so the pre-image point
    x_minus (from which balanced descent lands exactly on the canonical
    ray) sits at the current player/comparator distance.
    """
    cfg = cfg or DEFAULT_CONFIG
    x_prev = as_point(x_prev)
    dist = float(np.linalg.norm(x_prev - state.y))
    if dist <= 1e-12 * (1.0 + float(np.linalg.norm(x_prev))):
        raise DegenerateState("adversary needs the player and comparator apart")
    kappa = state.kappa
    move = dist / (2.0 * np.sqrt(kappa))
    grad_dir = np.array([1.0, np.sqrt(kappa)]) / np.sqrt(1.0 + kappa)

    def landing(alpha):
        # point on the ray {g (sqrt(kappa), 1)} with value `move`
        g_ray = np.sqrt(move / (2.0 * alpha * kappa))
        return g_ray * np.array([np.sqrt(kappa), 1.0])

    def pre_image_norm(alpha):
        x_land = landing(alpha)
        return float(np.linalg.norm(x_land + move * grad_dir))

    # ||x_minus|| decreases from +inf to `move` as alpha grows
    alpha_lo, alpha_hi = 1.0, 1.0
    for _ in range(200):
        if pre_image_norm(alpha_lo) > dist:
            break
        alpha_lo *= 0.25
    else:
        raise RootNotBracketed("could not bracket the request scale from below")
    for _ in range(200):
        if pre_image_norm(alpha_hi) < dist:
            break
        alpha_hi *= 4.0
    else:
        raise RootNotBracketed("could not bracket the request scale from above")
    for _ in range(120):
        alpha = np.sqrt(alpha_lo * alpha_hi)
        if pre_image_norm(alpha) > dist:
            alpha_lo = alpha
        else:
            alpha_hi = alpha
    alpha = np.sqrt(alpha_lo * alpha_hi)

    x_land = landing(alpha)
    x_minus = x_land + move * grad_dir
    to_canonical = _isometry_mapping_pair(state.y, x_prev, np.zeros(2), x_minus)
    canonical = Quadratic(np.array([2.0 * alpha, 2.0 * alpha * kappa]), np.zeros(2))
    f = canonical.precompose(to_canonical)
    y_t = state.y.copy()
    expected = to_canonical.inverse().apply(x_land)
    new_state = replace(state, t=state.t + 1, comparator_cost=state.comparator_cost + 0.0)
    return f, y_t, new_state, {"expected_response": expected, "expected_movement": move}


@dataclass
class AdversaryRun:
    kind: str
    kappa: float
    alg_cost: float
    comparator_cost: float
    ratio: float
    instance: Instance  # realized request sequence, replayable
    trajectory: np.ndarray  # (T+1, 2) player positions
    comparator_trajectory: np.ndarray
    phi: np.ndarray  # (T+1,) player-comparator distances
    flags: list = field(default_factory=list)
    records: list = field(default_factory=list)


def build_lbd_schedule(kind, kappa, horizon, cfg=None):
    """Run an adaptive adversary against its matching chaser.

    The comparator pre-pays 1 for moving from the shared start to e1.
    Per-step proof-backed inequalities are verified as the run unfolds
    and any failures are reported in ``flags`` rather than asserted.
    """
    from .chasers import COBDChaser, M2MChaser, run_chaser  # avoid import cycle

    if kind not in ("m2m", "cobd"):
        raise InvalidMode(f"unknown adversary kind {kind!r}")
    cfg = cfg or DEFAULT_CONFIG
    x0 = np.zeros(2)
    y0 = np.array([1.0, 0.0])
    state = AdaptiveAdversaryState(y=y0, kappa=float(kappa), comparator_cost=1.0)
    chaser = (M2MChaser if kind == "m2m" else COBDChaser)(x0, cfg=cfg)

    functions = []
    traj = [x0.copy()]
    cmp_traj = [y0.copy()]
    phi = [float(np.linalg.norm(x0 - y0))]
    flags = []
    records = []
    alg_cost = 0.0
    for t in range(1, int(horizon) + 1):
        if kind == "m2m":
            f, y_t, state = m2m_adversary_step(chaser.x, state)
            diag = {}
        else:
            f, y_t, state, diag = cobd_adversary_step(chaser.x, state, cfg)
        x_prev = chaser.x.copy()
        x_new = chaser.step(f)
        movement = float(np.linalg.norm(x_new - x_prev))
        hit = f.value(x_new)
        alg_cost += movement + hit
        phi_new = float(np.linalg.norm(x_new - y_t))
        if kind == "m2m":
            if phi_new < phi[-1] - 1e-9:
                flags.append(f"step {t}: potential decreased by {phi[-1] - phi_new}")
        else:
            step_cost = movement + hit
            drop = phi[-1] - phi_new
            if step_cost < (np.sqrt(kappa) / 5.0) * drop - 1e-6:
                flags.append(f"step {t}: cost below the potential-conversion rate")
            if step_cost < phi[-1] / np.sqrt(kappa) - 1e-6:
                flags.append(f"step {t}: cost below the distance floor")
            expected_move = diag["expected_movement"]
            if abs(movement - expected_move) > 1e-6 * (1.0 + expected_move):
                flags.append(f"step {t}: movement {movement} != constructed {expected_move}")
        functions.append(f)
        records.append({"t": t, "movement": movement, "hit": hit, "phi": phi_new})
        traj.append(x_new)
        cmp_traj.append(y_t)
        phi.append(phi_new)

    instance = Instance(
        2,
        x0,
        WholeSpace(),
        functions,
        {"adversary": kind, "kappa": float(kappa), "horizon": int(horizon)},
    )
    return AdversaryRun(
        kind=kind,
        kappa=float(kappa),
        alg_cost=alg_cost,
        comparator_cost=state.comparator_cost,
        ratio=alg_cost / state.comparator_cost,
        instance=instance,
        trajectory=np.array(traj),
        comparator_trajectory=np.array(cmp_traj),
        phi=np.array(phi),
        flags=flags,
        records=records,
    )
