"""Projection-free online convex optimization via membership oracles.

Feasible sets are accessed only through yes/no membership queries. The
gauge of a point (the smallest admissible shrink factor putting it in the
set) is computed by bisection, its gradient is estimated from a handful of
gauge evaluations, and a lazy gradient learner descends the
gauge-regularized loss, staying feasible without ever projecting
orthogonally. Adaptive-regret meta-algorithms aggregate such learners over
geometric lifespans, and a benchmark harness measures regret, interval
regret, and oracle-call complexity.
"""

from .bodies import (
    Ball,
    ConvexBody,
    Ellipsoid,
    OracleCounter,
    PolytopeBody,
    SmoothedPolytopeBody,
    active_face,
    box_body,
    random_polytope,
    simplex_body,
)
from .gauge import (
    GaugeEvaluation,
    RegularizedLoss,
    gauge_bisect,
    gauge_call_budget,
    minkowski_project,
    projection_call_budget,
    regularized_value,
)
from .gradients import (
    FdConfig,
    GradientEstimate,
    analytic_gauge_grad,
    estimate_grad_fd,
    estimate_grad_polytope_face,
    estimate_grad_randomized,
    estimate_grad_smoothed_polytope,
    fd_config_for_horizon,
    smoothing_scale_for_horizon,
)
from .learner import (
    EstimatorSpec,
    LearnerState,
    lazy_iterate_bound,
    learner_step,
    make_learner,
    run_learner,
    step_size,
)
from .losses import LossFunction, LossSequence, LossSpec, generate_losses, linear_loss, quadratic_loss
from .meta import (
    EflhState,
    FlhState,
    build_expert,
    eflh_level_lengths,
    eflh_make,
    eflh_round,
    flh_alive_set,
    flh_lifetime,
    flh_make,
    flh_round,
)
from .rand import rng_stream

__version__ = "0.1.0"
