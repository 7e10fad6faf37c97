"""Gradient estimators for the gauge function.

Outside the body the gauge is differentiable wherever the boundary is
smooth, and its gradient points along the boundary normal at the radial
projection, with magnitude fixed by one-homogeneity. Four estimators are
provided, trading oracle calls against error control:

* a coordinate finite-difference scheme (deterministic, uniform error bound
  on smooth boundaries),
* a randomized single-coordinate scheme (unbiased up to the gauge tolerance,
  bounded second moment),
* a face-identification scheme for polytopes (one bisection plus one row
  scan),
* the finite-difference scheme run against a log-sum-exp smoothed polytope.

All estimators return the zero vector for points inside the body, where 0
is a valid subgradient of the floored gauge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .bodies import Ball, ConvexBody, Ellipsoid, PolytopeBody, SmoothedPolytopeBody, active_face
from .gauge import _bisect, _gauge_value_nocheck, gauge_bisect

__all__ = [
    "FdConfig",
    "GradientEstimate",
    "analytic_gauge_grad",
    "estimate_grad_fd",
    "estimate_grad_polytope_face",
    "estimate_grad_randomized",
    "estimate_grad_smoothed_polytope",
    "fd_config_for_horizon",
    "smoothing_scale_for_horizon",
]


@dataclass(frozen=True)
class GradientEstimate:
    vector: np.ndarray
    calls_used: int
    kind: str  # randomized | finite_difference | polytope_face | smoothed_polytope | analytic
    error_bound: float | None = None
    tied: bool = False
    degenerate: bool = False
    events: tuple[str, ...] = field(default=())


@dataclass(frozen=True)
class FdConfig:
    """Finite-difference step, gauge tolerance, and boundary smoothness.

    ``fd_step`` is the coordinate perturbation (distinct name from any
    strong-convexity constant: both appear in the same pipeline).
    ``beta`` is the Lipschitz constant of the normalized boundary normal
    field; 0 means unknown, in which case no error bound is claimed.
    """

    fd_step: float
    gauge_tol: float
    beta: float = 0.0

    def __post_init__(self) -> None:
        if self.fd_step <= 0 or self.gauge_tol <= 0:
            raise ValueError("fd_step and gauge_tol must be positive")


def fd_config_for_horizon(dim: int, horizon: int, beta: float = 0.0) -> FdConfig:
    """The step/tolerance pair that makes the error bound scale as 1/T^2."""
    t = float(horizon)
    return FdConfig(fd_step=1.0 / (math.sqrt(dim) * t**2.5), gauge_tol=1.0 / (dim * t**5), beta=beta)


def smoothing_scale_for_horizon(horizon: int) -> float:
    """Smoothing scale for polytope runs of the given horizon (T^3)."""
    return float(horizon) ** 3


def _zero_estimate(dim: int, calls: int, kind: str) -> GradientEstimate:
    return GradientEstimate(np.zeros(dim), calls, kind, error_bound=0.0)


def _fd_error_bound(dim: int, cfg: FdConfig) -> float | None:
    if cfg.beta <= 0:
        return None
    return math.sqrt(dim) * (cfg.fd_step * cfg.beta**2 / 2.0 + 2.0 * cfg.gauge_tol / cfg.fd_step)


def estimate_grad_fd(body: ConvexBody, x: np.ndarray, cfg: FdConfig) -> GradientEstimate:
    """Forward differences of the gauge along each coordinate.

    Evaluates the gauge once at ``x`` and once per coordinate, d+1 gauge
    evaluations total. Points inside the body short-circuit to the zero
    vector after a single membership call. An estimate taken closer to the
    boundary than one step is flagged degenerate: the forward difference
    may straddle the kink where the floored gauge stops being smooth.
    """
    x = np.asarray(x, dtype=float)
    base = gauge_bisect(body, x, cfg.gauge_tol)
    if base.gamma == 1.0:
        return _zero_estimate(body.dim, base.calls_used, "finite_difference")

    calls = base.calls_used
    grad = np.empty(body.dim)
    for i in range(body.dim):
        xp = x.copy()
        xp[i] += cfg.fd_step
        g_i, c = _gauge_value_nocheck(body, xp, cfg.gauge_tol)
        grad[i] = (g_i - base.gamma) / cfg.fd_step
        calls += c
    degenerate = base.gamma < 1.0 + cfg.fd_step / body.r
    return GradientEstimate(
        grad,
        calls,
        "finite_difference",
        error_bound=_fd_error_bound(body.dim, cfg),
        degenerate=degenerate,
        events=("degenerate",) if degenerate else (),
    )


def estimate_grad_randomized(
    body: ConvexBody, x: np.ndarray, gauge_tol: float, rng: np.random.Generator
) -> GradientEstimate:
    """Single random coordinate difference, scaled by the dimension.

    Each draw has exactly one nonzero coordinate; the mean over draws is
    the full forward-difference gradient. The internal step is
    ``sqrt(gauge_tol) * r``, balancing difference truncation against the
    gauge approximation noise.
    """
    x = np.asarray(x, dtype=float)
    base = gauge_bisect(body, x, gauge_tol)
    if base.gamma == 1.0:
        return _zero_estimate(body.dim, base.calls_used, "randomized")

    mu = math.sqrt(gauge_tol) * body.r
    i = int(rng.integers(body.dim))
    xp = x.copy()
    xp[i] += mu
    g_i, c = _gauge_value_nocheck(body, xp, gauge_tol)
    s = np.zeros(body.dim)
    s[i] = body.dim * (g_i - base.gamma) / mu
    return GradientEstimate(s, base.calls_used + c, "randomized")


def estimate_grad_polytope_face(
    body: PolytopeBody, x: np.ndarray, horizon: int, rng: np.random.Generator
) -> GradientEstimate:
    """Identify the active facet of the radial projection; return its normal.

    The query point is first nudged by a random perturbation of magnitude
    ``D / T^3``: points whose projection lands on a facet boundary form a
    measure-zero set, so the nudge avoids ties almost surely while shifting
    the losses negligibly. The projection is computed to ``1/T^4``, the
    facet found by one row scan, and the gradient is the facet normal over
    its inner product with the projection. A tie after one retry falls back
    to finite differences on the smoothed polytope.
    """
    if not isinstance(body, PolytopeBody):
        raise TypeError("face estimator needs a PolytopeBody")
    x = np.asarray(x, dtype=float)
    proj_tol = 1.0 / float(horizon) ** 4
    rho = body.D / float(horizon) ** 3
    events: list[str] = []
    calls = 0

    for attempt in range(2):
        u = rng.normal(size=body.dim)
        u /= math.sqrt(float(u @ u))
        xp = x + rho * u
        gamma, c = _bisect(body, xp, proj_tol, project_mode=True)
        calls += c
        if gamma == 1.0:
            # perturbed point fell inside; the unperturbed point decides
            calls += 1
            if body.contains(x):
                return _zero_estimate(body.dim, calls, "polytope_face")
            events.append("perturbed_inside")
            continue
        proj = xp / gamma
        idx, tied = active_face(body, proj)
        if tied:
            events.append("tie")
            continue
        denom = float(proj @ body.normals[idx])
        err = 2.0 * (proj_tol + rho * (1.0 + math.sqrt(float(x @ x)) / body.r)) / body.r**2
        return GradientEstimate(
            body.normals[idx] / denom,
            calls,
            "polytope_face",
            error_bound=err,
            events=tuple(events),
        )

    smoothed = SmoothedPolytopeBody(body, smoothing_scale_for_horizon(horizon))
    est = estimate_grad_smoothed_polytope(smoothed, x, horizon)
    events.append("fallback_smoothed")
    return replace(
        est, kind="polytope_face", calls_used=calls + est.calls_used, tied=True,
        events=tuple(events) + est.events,
    )


def estimate_grad_smoothed_polytope(
    body: SmoothedPolytopeBody, x: np.ndarray, horizon: int
) -> GradientEstimate:
    """Finite differences against the smoothed polytope.

    The smoothing scale ``a = T^3`` makes the surrogate boundary curvature
    grow like T^3, so the step shrinks to ``1/(sqrt(d) T^5.5)`` and the
    gauge tolerance to ``1/(d T^11)`` to compensate. Each membership query
    on the smoothed set costs ``m`` constraint-row evaluations. No uniform
    error bound is claimed: the curvature of the surrogate scales with the
    smoothing, and the bound is left to empirical checks.
    """
    if not isinstance(body, SmoothedPolytopeBody):
        raise TypeError("smoothed estimator needs a SmoothedPolytopeBody")
    t = float(horizon)
    cfg = FdConfig(
        fd_step=1.0 / (math.sqrt(body.dim) * t**5.5),
        gauge_tol=1.0 / (body.dim * t**11),
    )
    est = estimate_grad_fd(body, x, cfg)
    return replace(est, kind="smoothed_polytope", error_bound=None)


def analytic_gauge_grad(body: ConvexBody, x: np.ndarray) -> GradientEstimate:
    """Closed-form gauge gradient for balls and ellipsoids (test oracle).

    Both follow from the normal-at-projection formula: the gradient points
    along the boundary normal at ``x / gamma(x)`` and has magnitude one
    over the projection's inner product with that normal.
    """
    x = np.asarray(x, dtype=float)
    if isinstance(body, Ball):
        nrm2 = float(x @ x)
        if nrm2 <= body.radius**2:
            return _zero_estimate(body.dim, 0, "analytic")
        return GradientEstimate(
            x / (body.radius * math.sqrt(nrm2)), 0, "analytic", error_bound=0.0
        )
    if isinstance(body, Ellipsoid):
        q = body.quad(x)
        if q <= 1.0:
            return _zero_estimate(body.dim, 0, "analytic")
        return GradientEstimate(body.diag * x / math.sqrt(q), 0, "analytic", error_bound=0.0)
    raise TypeError("analytic gauge gradient known only for Ball and Ellipsoid")
