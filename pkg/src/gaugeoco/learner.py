"""Lazy gradient descent on the gauge-regularized loss.

The learner keeps an unconstrained iterate ``y`` and plays its radial
projection ``x = y / gamma(y)``. Each round it descends the regularized
loss: the loss gradient at ``y`` plus ``3 G D`` times an estimated gauge
gradient. Inside the body the gauge term vanishes and the update is plain
gradient descent. Three step-size schedules are supported:

* ``convex``: ``r / (sqrt(T) G)``
* ``strongly_convex``: ``1 / (lam t)``
* ``adaptive_smooth``: ``D / (sqrt(T) G)`` (for smooth-boundary bodies,
  where the lazy iterate provably stays bounded)

The gauge and its gradient are approximated to ``delta = 1/T^2``; the
projection uses the same tolerance. The displayed update coefficient and
the regularized-loss definition are kept at the same ``3 G D``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bodies import ConvexBody, PolytopeBody, SmoothedPolytopeBody
from .gauge import minkowski_project
from .gradients import (
    FdConfig,
    GradientEstimate,
    analytic_gauge_grad,
    estimate_grad_fd,
    estimate_grad_polytope_face,
    estimate_grad_randomized,
    estimate_grad_smoothed_polytope,
    fd_config_for_horizon,
)
from .losses import LossFunction
from .rand import rng_stream

__all__ = [
    "SCHEDULES",
    "ESTIMATOR_KINDS",
    "EstimatorSpec",
    "LearnerState",
    "lazy_iterate_bound",
    "learner_step",
    "make_learner",
    "run_learner",
    "step_size",
]

SCHEDULES = ("convex", "strongly_convex", "adaptive_smooth")
ESTIMATOR_KINDS = (
    "finite_difference",
    "randomized",
    "polytope_face",
    "smoothed_polytope",
    "analytic",
)


def step_size(
    schedule: str, t: int, horizon: int, G: float, D: float, r: float, lam: float = 0.0
) -> float:
    if schedule == "convex":
        return r / (math.sqrt(horizon) * G)
    if schedule == "strongly_convex":
        if lam <= 0:
            raise ValueError("strongly_convex schedule needs lam > 0")
        return 1.0 / (lam * t)
    if schedule == "adaptive_smooth":
        return D / (math.sqrt(horizon) * G)
    raise ValueError(f"unknown schedule {schedule!r}")


def lazy_iterate_bound(r: float, D: float) -> float:
    """Norm bound on the lazy iterate under the adaptive_smooth schedule."""
    return (r / 3.0) * (2.0 + 3.0 * D / r) ** 2 + 3.0 * D + 2.0 * r


@dataclass(frozen=True)
class EstimatorSpec:
    kind: str = "finite_difference"
    beta: float = 0.0  # boundary smoothness constant, used for fd error bounds

    def __post_init__(self) -> None:
        if self.kind not in ESTIMATOR_KINDS:
            raise ValueError(f"unknown estimator kind {self.kind!r}")


@dataclass
class LearnerState:
    """Mutable state of one learner instance (single-owner, stepped in order)."""

    body: ConvexBody
    horizon: int
    G: float
    schedule: str
    estimator: EstimatorSpec
    lam: float
    delta: float
    y: np.ndarray
    x: np.ndarray
    t: int = 1
    rng: np.random.Generator | None = None
    fd_cfg: FdConfig | None = None
    calls_last: int = 0
    events_last: tuple[str, ...] = field(default=())


def make_learner(
    body: ConvexBody,
    horizon: int,
    G: float,
    schedule: str = "convex",
    estimator: EstimatorSpec | None = None,
    lam: float = 0.0,
    y0: np.ndarray | None = None,
    seed: int = 0,
    seed_extra: tuple[int, ...] = (),
) -> LearnerState:
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if schedule not in SCHEDULES:
        raise ValueError(f"unknown schedule {schedule!r}")
    if schedule == "strongly_convex" and lam <= 0:
        raise ValueError("strongly_convex schedule needs lam > 0")
    estimator = estimator or EstimatorSpec()
    y0 = np.zeros(body.dim) if y0 is None else np.asarray(y0, dtype=float)
    delta = 1.0 / horizon**2 if horizon >= 2 else 0.25
    fd_cfg = None
    if estimator.kind == "finite_difference":
        fd_cfg = fd_config_for_horizon(body.dim, horizon, estimator.beta)
    return LearnerState(
        body=body,
        horizon=horizon,
        G=float(G),
        schedule=schedule,
        estimator=estimator,
        lam=float(lam),
        delta=delta,
        y=y0.copy(),
        x=y0.copy(),
        rng=rng_stream(seed, 1, *seed_extra),
        fd_cfg=fd_cfg,
    )


def _gauge_gradient(state: LearnerState, y: np.ndarray) -> GradientEstimate:
    kind = state.estimator.kind
    if kind == "finite_difference":
        return estimate_grad_fd(state.body, y, state.fd_cfg)
    if kind == "randomized":
        # squared tolerance keeps the difference-step bias at the delta scale
        return estimate_grad_randomized(state.body, y, state.delta**2, state.rng)
    if kind == "polytope_face":
        return estimate_grad_polytope_face(state.body, y, state.horizon, state.rng)
    if kind == "smoothed_polytope":
        return estimate_grad_smoothed_polytope(state.body, y, state.horizon)
    if kind == "analytic":
        return analytic_gauge_grad(state.body, y)
    raise ValueError(f"unknown estimator kind {kind!r}")


def learner_step(state: LearnerState, loss: LossFunction) -> np.ndarray:
    """Play the current point, then advance the lazy iterate on ``loss``.

    Returns the played point. The loss gradient is taken at the lazy
    iterate, not the played point: the descent telescopes in ``y``.
    """
    played = state.x
    calls_before = state.body.counter.calls

    grad_loss = np.asarray(loss.grad(state.y), dtype=float)
    if not np.all(np.isfinite(grad_loss)):
        raise ValueError(f"non-finite loss gradient at round {state.t}")
    est = _gauge_gradient(state, state.y)

    eta = step_size(
        state.schedule, state.t, state.horizon, state.G, state.body.D, state.body.r, state.lam
    )
    y_next = state.y - eta * (grad_loss + 3.0 * state.G * state.body.D * est.vector)
    x_next = minkowski_project(state.body, y_next, state.delta)

    state.y = y_next
    state.x = x_next
    state.t += 1
    state.calls_last = state.body.counter.calls - calls_before
    state.events_last = est.events
    return played


def run_learner(
    body: ConvexBody,
    losses,
    schedule: str,
    horizon: int,
    estimator: EstimatorSpec | None = None,
    G: float | None = None,
    lam: float = 0.0,
    seed: int = 0,
) -> dict:
    """Run one learner over a full loss sequence.

    Returns a trajectory dict with the played points, per-round losses,
    per-round membership-call counts, estimator events, and the norms of
    the lazy iterates (for the boundedness checks).
    """
    if len(losses) != horizon:
        raise ValueError(f"need {horizon} losses, got {len(losses)}")
    if horizon == 0:
        return {
            "xs": np.zeros((0, body.dim)),
            "values": np.zeros(0),
            "calls": np.zeros(0, dtype=int),
            "events": [],
            "y_norms": np.zeros(0),
        }
    g_run = max(lf.G for lf in losses) if G is None else float(G)
    state = make_learner(body, horizon, g_run, schedule, estimator, lam=lam, seed=seed)
    xs = np.empty((horizon, body.dim))
    vals = np.empty(horizon)
    calls = np.empty(horizon, dtype=int)
    y_norms = np.empty(horizon)
    events: list[tuple[str, ...]] = []
    for t in range(horizon):
        y_norms[t] = math.sqrt(float(state.y @ state.y))
        played = learner_step(state, losses[t])
        xs[t] = played
        vals[t] = losses[t].value(played)
        calls[t] = state.calls_last
        events.append(state.events_last)
    return {"xs": xs, "values": vals, "calls": calls, "events": events, "y_norms": y_norms}
