"""Fast invariant suite behind the ``verify`` CLI command.

Runs a curated sample of the library's core contracts in under a minute
and prints one PASS/FAIL line per check. The heavyweight acceptance
experiments live in the test suite; this command is the smoke check.
"""

from __future__ import annotations

import math

import numpy as np

from ..bodies import Ball, Ellipsoid, SmoothedPolytopeBody, box_body, simplex_body
from ..gauge import RegularizedLoss, gauge_bisect, gauge_call_budget, minkowski_project
from ..gradients import analytic_gauge_grad, estimate_grad_fd, estimate_grad_polytope_face, fd_config_for_horizon
from ..learner import EstimatorSpec, run_learner
from ..losses import LossSpec, generate_losses
from ..rand import rng_stream
from .comparators import make_body, offline_comparator

__all__ = ["run_verify", "VERIFY_CHECKS"]


def _analytic_gauge(kind, body, x):
    if kind == "ball":
        return max(1.0, float(np.linalg.norm(x)) / body.radius)
    if kind == "ellipsoid":
        return max(1.0, math.sqrt(body.quad(x)))
    if kind == "box":
        return max(1.0, float(np.abs(x).max()))
    raise ValueError(kind)


def check_gauge_accuracy() -> tuple[bool, str]:
    rng = rng_stream(11)
    tol = 1e-6
    worst = 0.0
    for kind, body in (
        ("ball", Ball(1.0, 2)),
        ("ellipsoid", Ellipsoid(np.array([4.0, 1.0]))),
        ("box", box_body(1.0, 2)),
    ):
        budget = gauge_call_budget(body, tol)
        for _ in range(200):
            x = rng.normal(size=body.dim)
            x *= rng.uniform(0, body.D) / np.linalg.norm(x)
            before = body.counter.calls
            ev = gauge_bisect(body, x, tol)
            used = body.counter.calls - before
            if used > budget or used != ev.calls_used:
                return False, f"call budget violated on {kind}: {used} > {budget}"
            worst = max(worst, abs(ev.gamma - _analytic_gauge(kind, body, x)))
    return worst <= tol, f"max gauge error {worst:.2e} (tol {tol:.0e})"


def check_gauge_shape() -> tuple[bool, str]:
    body = Ellipsoid(np.array([4.0, 1.0]))
    rng = rng_stream(12)
    tol = 1e-5
    for _ in range(200):
        x1, x2 = rng.normal(size=2), rng.normal(size=2)
        lam = rng.uniform(0.05, 0.95)
        g1 = gauge_bisect(body, x1, tol).gamma
        g2 = gauge_bisect(body, x2, tol).gamma
        gz = gauge_bisect(body, lam * x1 + (1 - lam) * x2, tol).gamma
        if gz > lam * g1 + (1 - lam) * g2 + 3 * tol:
            return False, "convexity violated"
        if abs(g1 - g2) > np.linalg.norm(x1 - x2) / body.r + 2 * tol:
            return False, "Lipschitz bound violated"
    return True, "convexity and 1/r-Lipschitz hold on 200 samples"


def check_smoothing_sandwich() -> tuple[bool, str]:
    base = box_body(1.0, 2)
    scale = 500.0
    smoothed = SmoothedPolytopeBody(base, scale)
    slack = math.log(base.m) / scale
    rng = rng_stream(13)
    for _ in range(1000):
        x = rng.uniform(-2, 2, size=2)
        h = float((base.normals @ x + base.offsets).max())
        ha = smoothed._h_smooth_raw(x)
        if not (h <= ha + 1e-12 and ha <= h + slack + 1e-12):
            return False, f"sandwich violated at {x}"
        if h <= -slack and ha > 0:
            return False, "subset chain violated"
    return True, "h <= h_a <= h + log(m)/a on 1000 samples"


def check_gradients() -> tuple[bool, str]:
    ball = Ball(1.0, 2)
    cfg = fd_config_for_horizon(2, 100, beta=1.0)
    x = np.array([1.4, -0.3])
    est = estimate_grad_fd(ball, x, cfg)
    ref = analytic_gauge_grad(ball, x)
    if np.linalg.norm(est.vector - ref.vector) > est.error_bound:
        return False, "fd estimator outside its error bound"
    box = box_body(1.0, 2)
    face = estimate_grad_polytope_face(box, np.array([2.0, 0.3]), 100, rng_stream(14))
    if np.linalg.norm(face.vector - np.array([1.0, 0.0])) > 1e-3:
        return False, "face estimator missed the active facet normal"
    return True, "fd and face estimators agree with analytic gradients"


def check_learner_feasibility() -> tuple[bool, str]:
    body = Ball(1.0, 2)
    seq = generate_losses(
        LossSpec(family="linear", directions=((1.0, 0.0),)), 5, 200, 2, body.D
    )
    traj = run_learner(body, seq, "convex", 200, EstimatorSpec("finite_difference", beta=1.0))
    delta = 1.0 / 200**2
    shrink = 1.0 - delta / body.r
    ok = all(body._inside(shrink * x) for x in traj["xs"])
    return ok, "all played points feasible after inward rounding"


def check_comparator() -> tuple[bool, str]:
    handle = make_body({"kind": "ball", "dim": 2, "radius": 1.0})
    seq = generate_losses(
        LossSpec(family="linear", directions=((1.0, 0.0),)), 1, 50, 2, handle.body.D
    )
    comp = offline_comparator(handle, seq)
    expect = (handle.body.D - 1.0) * 50
    ok = np.allclose(comp.point, [-1.0, 0.0]) and abs(comp.value - expect) < 1e-9
    return ok, f"stationary linear comparator value {comp.value:.6f} (expected {expect})"


def check_projection_decrease() -> tuple[bool, str]:
    body = Ball(1.0, 2)
    horizon = 100
    tol = 1.0 / horizon**2
    rng = rng_stream(15)
    from ..losses import linear_loss

    for _ in range(100):
        g = rng.normal(size=2)
        g /= np.linalg.norm(g)
        loss = RegularizedLoss(linear_loss(g, body.D), 1.0, body.D, body, tol)
        y = rng.normal(size=2)
        y *= rng.uniform(1.01, 1.9) / np.linalg.norm(y)
        proj = minkowski_project(body, y, tol)
        slack = (1.0 * body.r + 3.0 * body.D) / (body.r * horizon**2)
        if loss.value(proj) > loss.value(y) + slack:
            return False, "projection increased the regularized loss beyond the slack"
    return True, "radial projection only reduces the regularized loss"


VERIFY_CHECKS = (
    ("gauge accuracy and call budget", check_gauge_accuracy),
    ("gauge convexity and Lipschitz bounds", check_gauge_shape),
    ("polytope smoothing sandwich", check_smoothing_sandwich),
    ("gradient estimators vs analytic", check_gradients),
    ("learner feasibility", check_learner_feasibility),
    ("certified comparator", check_comparator),
    ("projection decrease", check_projection_decrease),
)


def run_verify(stream=None) -> int:
    """Run all checks; print one line each; return a process exit code."""
    import sys

    stream = stream or sys.stdout
    failures = 0
    for name, fn in VERIFY_CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        tag = "PASS" if ok else "FAIL"
        failures += 0 if ok else 1
        print(f"{tag} {name}: {detail}", file=stream)
    print(
        f"{len(VERIFY_CHECKS) - failures}/{len(VERIFY_CHECKS)} checks passed", file=stream
    )
    return 1 if failures else 0
