"""chasekit: online convex function chasing.

Chasers that balance movement against hit cost, adversarial
lower-bound instance generators, an offline-optimum benchmark, online
dimension reduction for subspace-supported requests, and a harness
that checks the per-step amortized guarantees numerically.
"""

from .adversaries import (
    AdaptiveAdversaryState,
    AdversaryRun,
    CubeParams,
    build_lbd_schedule,
    cobd_adversary_step,
    gen_cube_instance,
    m2m_adversary_step,
    preset_params,
)
from .analysis import (
    AmortizedReport,
    PotentialTrace,
    RatioReport,
    amortized_check,
    amortized_constants,
    competitive_ratio,
    potential_trace,
    scaling_fit,
    trajectory_records,
)
from .chasers import (
    CHASER_KINDS,
    Chaser,
    COBDChaser,
    ConstrainedM2MChaser,
    FollowMinChaser,
    M2MChaser,
    RunResult,
    StepRecord,
    cobd_step,
    constrained_m2m_step,
    follow_min_step,
    m2m_step,
    make_chaser,
    run_chaser,
)
from .errors import (
    ChaseError,
    DegenerateState,
    DimensionMismatch,
    DimensionOverflow,
    InvalidMode,
    InvalidSet,
    LengthMismatch,
    NoBracket,
    NonConvergence,
    NonPositiveData,
    NotDifferentiable,
    NumericalAmbiguity,
    OffSubspace,
    RootNotBracketed,
    SchemaError,
)
from .functions import (
    BlackBoxFunction,
    ConvexFunction,
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
from .geometry import (
    AffineIsometry,
    AffineSet,
    AffineSubspace,
    Ball,
    FeasibleSet,
    HalfspaceIntersection,
    WholeSpace,
    norm,
    orthonormalize,
    project_affine,
    project_ball,
    project_set,
    rotation_mapping_subspace,
)
from .instances import (
    Instance,
    instance_from_dict,
    instance_to_dict,
    load_instance,
    save_instance,
)
from .reduction import (
    LiftedChaser,
    ReductionState,
    init_reduction,
    pull_back,
    reduce_request,
    run_lifted,
)
from .solvers import (
    OfflineResult,
    SolverConfig,
    bisect_root,
    cobd_inner,
    constrained_minimize,
    offline_opt,
    offline_opt_grid_1d,
)

__version__ = "0.1.0"
