"""Gradient estimators against analytic oracles, plus structural invariants."""

import math

import numpy as np
import pytest

from gaugeoco import (
    Ball,
    Ellipsoid,
    SmoothedPolytopeBody,
    active_face,
    analytic_gauge_grad,
    box_body,
    estimate_grad_fd,
    estimate_grad_polytope_face,
    estimate_grad_randomized,
    estimate_grad_smoothed_polytope,
    fd_config_for_horizon,
    gauge_bisect,
    gauge_call_budget,
    simplex_body,
)
from gaugeoco.gradients import FdConfig
from gaugeoco.rand import rng_stream
from conftest import sample_at_gauge

BALL_BETA = 1.0  # normalized normal field of the unit ball is x/R^2


def _box_gauge_grad(box, x):
    """Exact gauge gradient of the box away from diagonal ties."""
    half = -float(box.offsets[0])
    i = int(np.argmax(np.abs(x)))
    g = np.zeros(box.dim)
    g[i] = np.sign(x[i]) / half
    return g


def test_analytic_examples():
    assert np.allclose(analytic_gauge_grad(Ball(1.0, 2), np.array([2.0, 0.0])).vector, [1.0, 0.0])
    assert np.allclose(analytic_gauge_grad(Ball(2.0, 2), np.array([4.0, 0.0])).vector, [0.5, 0.0])
    ell = Ellipsoid(np.array([4.0, 1.0]))
    got = analytic_gauge_grad(ell, np.array([1.0, 1.0])).vector
    assert np.allclose(got, np.array([4.0, 1.0]) / math.sqrt(5.0))


def test_analytic_matches_normal_at_projection_formula():
    # independent derivation: v(P)/(P . v(P)) with v the (unit) boundary normal
    ell = Ellipsoid(np.array([4.0, 1.0]))
    x = np.array([1.0, 1.0])
    gamma = math.sqrt(float((ell.diag * x) @ x))
    proj = x / gamma
    v = ell.diag * proj
    v = v / np.linalg.norm(v)
    expected = v / float(proj @ v)
    assert np.allclose(analytic_gauge_grad(ell, x).vector, expected, atol=1e-12)


def test_analytic_interior_zero():
    assert np.all(analytic_gauge_grad(Ball(1.0, 2), np.array([0.3, 0.1])).vector == 0)


def test_fd_examples():
    ball = Ball(1.0, 2)
    est = estimate_grad_fd(ball, np.array([2.0, 0.0]), fd_config_for_horizon(2, 10, BALL_BETA))
    assert np.linalg.norm(est.vector - [1.0, 0.0]) <= 1e-2
    ell = Ellipsoid(np.array([4.0, 1.0]))
    est = estimate_grad_fd(ell, np.array([1.0, 1.0]), fd_config_for_horizon(2, 100, 4.0))
    assert np.linalg.norm(est.vector - np.array([4.0, 1.0]) / math.sqrt(5)) <= 1e-4
    interior = estimate_grad_fd(ball, np.array([0.1, 0.0]), fd_config_for_horizon(2, 10))
    assert np.all(interior.vector == 0) and interior.calls_used == 1
    assert interior.error_bound == 0.0


@pytest.mark.parametrize("horizon", [10, 100])
def test_fd_respects_error_bound_and_budget(horizon):
    rng = rng_stream(30, horizon)
    bodies = [("ball", Ball(1.0, 2), BALL_BETA), ("ellipsoid", Ellipsoid(np.array([4.0, 1.0])), 4.0)]
    for kind, body, beta in bodies:
        cfg = fd_config_for_horizon(2, horizon, beta)
        budget = (body.dim + 1) * math.ceil(
            math.log2(2 * body.D**2 / (body.r**2 * cfg.gauge_tol))
        )
        for _ in range(100):
            x = sample_at_gauge(rng, kind, body, rng.uniform(1.1, 1.8))
            before = body.counter.calls
            est = estimate_grad_fd(body, x, cfg)
            assert body.counter.calls - before == est.calls_used <= budget
            ref = analytic_gauge_grad(body, x).vector
            assert np.linalg.norm(est.vector - ref) <= est.error_bound


def test_fd_degenerate_flag_near_boundary():
    ball = Ball(1.0, 2)
    cfg = FdConfig(fd_step=0.05, gauge_tol=1e-8, beta=1.0)
    est = estimate_grad_fd(ball, np.array([1.0 + 1e-4, 0.0]), cfg)
    assert est.degenerate and "degenerate" in est.events


def test_randomized_single_draw_structure():
    ball = Ball(1.0, 2)
    rng = rng_stream(31)
    est = estimate_grad_randomized(ball, np.array([2.0, 0.0]), 1e-6, rng)
    assert np.count_nonzero(est.vector) == 1  # d * c * e_i support
    interior = estimate_grad_randomized(ball, np.array([0.2, 0.0]), 1e-6, rng)
    assert np.all(interior.vector == 0)


def test_randomized_mean_and_second_moment():
    ball = Ball(1.0, 2)
    rng = rng_stream(32)
    x = np.array([2.0, 0.0])
    n = 20_000
    draws = np.empty((n, 2))
    sq = np.empty(n)
    budget = 2 * gauge_call_budget(ball, 1e-6) + 1
    for i in range(n):
        est = estimate_grad_randomized(ball, x, 1e-6, rng)
        assert est.calls_used <= budget
        draws[i] = est.vector
        sq[i] = float(est.vector @ est.vector)
    mean = draws.mean(axis=0)
    se = draws.std(axis=0, ddof=1) / math.sqrt(n)
    ref = analytic_gauge_grad(ball, x).vector
    assert np.all(np.abs(mean - ref) <= 3 * se + 1e-3)
    moment_se = sq.std(ddof=1) / math.sqrt(n)
    assert sq.mean() <= 2.0 / ball.r**2 + 3 * moment_se


def test_face_estimator_examples():
    box = box_body(1.0, 2)
    rng = rng_stream(33)
    est = estimate_grad_polytope_face(box, np.array([2.0, 0.3]), 100, rng)
    assert np.linalg.norm(est.vector - [1.0, 0.0]) <= est.error_bound
    assert not est.tied
    est = estimate_grad_polytope_face(box, np.array([0.3, -2.0]), 100, rng)
    assert np.linalg.norm(est.vector - [0.0, -1.0]) <= est.error_bound


def test_face_estimator_corner_ray():
    box = box_body(1.0, 2)
    # the exact corner ray is the measure-zero tie set; perturbation must
    # resolve it to one of the two adjacent facet normals
    _, tied = active_face(box, np.array([1.0, 1.0]))
    assert tied
    for seed in range(5):
        est = estimate_grad_polytope_face(box, np.array([2.0, 2.0]), 100, rng_stream(34, seed))
        dist = min(
            np.linalg.norm(est.vector - np.array([1.0, 0.0])),
            np.linalg.norm(est.vector - np.array([0.0, 1.0])),
        )
        assert dist <= 1e-3


def test_face_estimator_budget_and_exactness():
    rng = rng_stream(35)
    horizon = 100
    for body in (box_body(1.0, 2), simplex_body(2)):
        call_budget = math.ceil(math.log2(2 * body.D * horizon**4))
        for _ in range(100):
            u = rng.normal(size=2)
            u /= np.linalg.norm(u)
            x = u * rng.uniform(0.75, 1.0) * body.D  # exterior, norm within D
            before_calls = body.counter.calls
            before_rows = body.counter.row_evals
            est = estimate_grad_polytope_face(body, x, horizon, rng)
            if est.tied or "perturbed_inside" in est.events or not est.vector.any():
                continue  # interior samples and retry paths have other budgets
            assert body.counter.calls - before_calls <= call_budget
            assert body.counter.row_evals - before_rows <= (call_budget + 1) * body.m
            # exact direction: the normal of the gauge-active facet
            ratios = (body.normals @ x) / (-body.offsets)
            i_star = int(np.argmax(ratios))
            expected = body.normals[i_star] / (-body.offsets[i_star])
            if np.sort(ratios)[-1] - np.sort(ratios)[-2] > 1e-6:
                assert np.linalg.norm(est.vector - expected) <= est.error_bound


def test_face_estimator_interior_zero():
    box = box_body(1.0, 2)
    est = estimate_grad_polytope_face(box, np.array([0.1, 0.2]), 100, rng_stream(36))
    assert np.all(est.vector == 0)


def test_smoothed_estimator_box():
    box = box_body(1.0, 2)
    sm = SmoothedPolytopeBody(box, 1000.0)  # a = T^3 at T = 10
    est = estimate_grad_smoothed_polytope(sm, np.array([2.0, 0.3]), 10)
    assert np.linalg.norm(est.vector - [1.0, 0.0]) <= 0.02
    assert est.kind == "smoothed_polytope"


def test_smoothed_estimator_vs_dense_scan_reference():
    # independent oracle: central differences of a dense-scan gauge of the
    # smoothed set (no bisection anywhere in the reference path)
    box = box_body(1.0, 2)
    sm = SmoothedPolytopeBody(box, 1000.0)
    x = np.array([2.0, 0.3])

    def scan_gauge(pt):
        lo, hi, step = 1.0, 6.0, 1e-4
        for fine in (1e-4, 1e-8):
            c = lo
            hit = None
            while c <= hi:
                if sm._h_smooth_raw(pt / c) <= 0:
                    hit = c
                    break
                c += fine
            lo, hi = max(1.0, hit - 2 * 1e-4), hit
        return hit

    h = 1e-4
    ref = np.array(
        [
            (scan_gauge(x + h * e) - scan_gauge(x - h * e)) / (2 * h)
            for e in np.eye(2)
        ]
    )
    est = estimate_grad_smoothed_polytope(sm, x, 10)
    assert np.linalg.norm(est.vector - ref) <= 1e-3


def test_smoothed_single_row_matches_plain_fd():
    from gaugeoco import PolytopeBody

    half_space = PolytopeBody(np.array([[1.0, 0.0]]), np.array([-1.0]), diameter=4.0)
    sm = SmoothedPolytopeBody(half_space, 1000.0)
    x = np.array([2.0, 0.5])
    est_sm = estimate_grad_smoothed_polytope(sm, x, 10)
    cfg = FdConfig(fd_step=1.0 / (math.sqrt(2) * 10**5.5), gauge_tol=1.0 / (2 * 10**11))
    est_fd = estimate_grad_fd(half_space, x, cfg)
    assert np.allclose(est_sm.vector, est_fd.vector, atol=1e-9)
    assert est_sm.calls_used == est_fd.calls_used


def test_smoothed_interior_zero():
    box = box_body(1.0, 2)
    sm = SmoothedPolytopeBody(box, 1000.0)
    est = estimate_grad_smoothed_polytope(sm, np.array([0.1, 0.0]), 10)
    assert np.all(est.vector == 0)


def test_direction_constant_along_rays():
    # one-homogeneity: the gauge gradient is constant along exterior rays
    rng = rng_stream(37)
    ell = Ellipsoid(np.array([4.0, 1.0]))
    cfg = fd_config_for_horizon(2, 100, 4.0)
    for _ in range(25):
        x = sample_at_gauge(rng, "ellipsoid", ell, rng.uniform(1.2, 1.5))
        e1 = estimate_grad_fd(ell, x, cfg)
        e2 = estimate_grad_fd(ell, 1.3 * x, cfg)
        assert np.linalg.norm(e1.vector - e2.vector) <= 2 * e1.error_bound


def test_euler_identity():
    # x . grad gamma(x) = gamma(x) for exterior points (one-homogeneity)
    rng = rng_stream(38)
    ell = Ellipsoid(np.array([4.0, 1.0]))
    ball = Ball(1.0, 2)
    cfg = fd_config_for_horizon(2, 100, 4.0)
    for kind, body in (("ball", ball), ("ellipsoid", ell)):
        for _ in range(50):
            x = sample_at_gauge(rng, kind, body, rng.uniform(1.1, 1.9))
            ana = analytic_gauge_grad(body, x).vector
            gamma = gauge_bisect(body, x, 1e-9).gamma
            assert abs(float(x @ ana) - gamma) <= 1e-6
            est = estimate_grad_fd(body, x, cfg)
            assert abs(float(x @ est.vector) - gamma) <= (
                np.linalg.norm(x) * est.error_bound + 1e-6
            )


def test_ball_gradient_magnitude():
    rng = rng_stream(39)
    for radius in (1.0, 2.0):
        ball = Ball(radius, 3)
        for _ in range(50):
            x = rng.normal(size=3)
            x *= rng.uniform(1.1, 1.9) * radius / np.linalg.norm(x)
            assert np.linalg.norm(
                analytic_gauge_grad(ball, x).vector
            ) == pytest.approx(1.0 / radius, abs=1e-12)


def test_analytic_unsupported_body_raises():
    with pytest.raises(TypeError):
        analytic_gauge_grad(box_body(1.0, 2), np.array([2.0, 0.0]))
