"""Gauge bisection: accuracy, call budgets, shape properties, regularization."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaugeoco import (
    Ball,
    Ellipsoid,
    RegularizedLoss,
    gauge_bisect,
    gauge_call_budget,
    linear_loss,
    minkowski_project,
    projection_call_budget,
    regularized_value,
)
from gaugeoco.rand import rng_stream
from conftest import analytic_bodies, analytic_gauge, sample_at_gauge


def _scan_gauge(inside, x, lo=1.0, hi=10.0, step=1e-7):
    """Independent oracle: coarse-to-fine dense scan for the minimal scale.

    Scans candidate scales c and returns the smallest with x/c inside,
    refining a 1e-3 window down to the requested step. Never touches the
    bisection code path.
    """
    for coarse in (1e-3, step):
        grid = np.arange(lo, hi + coarse, coarse)
        hit = None
        for c in grid:
            if inside(x / c):
                hit = c
                break
        if hit is None:
            raise AssertionError("scan window too small")
        lo, hi = max(1.0, hit - 2e-3), hit
    return hit


def test_ball_example_accuracy_and_calls():
    ball = Ball(1.0, 2)
    ball.counter.reset()
    ev = gauge_bisect(ball, np.array([2.0, 0.0]), 1e-6)
    assert ev.gamma == pytest.approx(2.0, abs=1e-6)
    assert ev.calls_used <= 24  # ceil(log2(2*4/1e-6)) + 1
    assert ev.calls_used == ball.counter.calls


def test_interior_short_circuit():
    ball = Ball(1.0, 2)
    ev = gauge_bisect(ball, np.array([0.5, 0.0]), 1e-6)
    assert ev.gamma == 1.0 and ev.calls_used == 1
    assert np.array_equal(ev.projection, [0.5, 0.0])


def test_ellipsoid_example_vs_dense_scan():
    ell = Ellipsoid(np.array([4.0, 1.0]))
    x = np.array([1.0, 1.0])
    scanned = _scan_gauge(lambda p: float((ell.diag * p) @ p) <= 1.0, x)
    assert scanned == pytest.approx(math.sqrt(5.0), abs=2e-7)
    ev = gauge_bisect(ell, x, 1e-6)
    assert ev.gamma == pytest.approx(2.2360679775, abs=1.2e-6)
    assert abs(ev.gamma - scanned) <= 1e-6 + 2e-7


def test_gauge_projection_consistency():
    ell = Ellipsoid(np.array([4.0, 1.0]))
    x = np.array([1.3, -0.4])
    ev = gauge_bisect(ell, x, 1e-8)
    assert np.array_equal(ev.projection, x / ev.gamma)  # definitional identity
    assert ev.gamma >= 1.0
    # the bracketing inner point is feasible after inward rounding
    assert ell.contains(ev.projection * (1.0 - ev.tolerance / ell.r))


def test_bad_inputs_raise():
    ball = Ball(1.0, 2)
    with pytest.raises(ValueError):
        gauge_bisect(ball, np.array([1.0, np.nan]), 1e-6)
    with pytest.raises(ValueError):
        gauge_bisect(ball, np.array([1.0, 0.0]), 0.0)
    with pytest.raises(ValueError):
        gauge_bisect(ball, np.array([1.0, 0.0]), -1e-3)
    with pytest.raises(ValueError):
        minkowski_project(ball, np.array([1.0, 0.0]), 1.5)


@pytest.mark.parametrize("dim", [2, 10])
@pytest.mark.parametrize("tol", [1e-3, 1e-6])
def test_accuracy_and_budget_everywhere(dim, tol):
    rng = rng_stream(100, dim)
    for kind, body in analytic_bodies(dim):
        budget = gauge_call_budget(body, tol)
        for _ in range(250):
            x = rng.normal(size=dim)
            x *= rng.uniform(0.0, body.D) / np.linalg.norm(x)
            before = body.counter.calls
            ev = gauge_bisect(body, x, tol)
            assert body.counter.calls - before == ev.calls_used <= budget
            assert abs(ev.gamma - analytic_gauge(kind, body, x)) <= tol


def test_projection_examples():
    ball = Ball(1.0, 2)
    assert np.allclose(minkowski_project(ball, np.array([2.0, 0.0]), 1e-6), [1.0, 0.0], atol=1e-6)
    inner = np.array([0.3, 0.1])
    assert np.array_equal(minkowski_project(ball, inner, 1e-6), inner)
    ell = Ellipsoid(np.array([4.0, 1.0]))
    got = minkowski_project(ell, np.array([1.0, 1.0]), 1e-6)
    assert np.allclose(got, [0.4472136, 0.4472136], atol=2e-6)


def test_projection_budget_and_feasibility(rng):
    tol = 1e-5
    for kind, body in analytic_bodies(2):
        budget = projection_call_budget(body, tol)
        for _ in range(300):
            x = rng.normal(size=2)
            x *= rng.uniform(0.0, body.D) / np.linalg.norm(x)
            before = body.counter.calls
            proj = minkowski_project(body, x, tol)
            assert body.counter.calls - before <= budget
            true_proj = x / analytic_gauge(kind, body, x)
            assert np.linalg.norm(proj - true_proj) <= tol
            assert body.contains(proj * (1.0 - tol / body.r))


def test_convexity_sampled(rng):
    tol = 1e-5
    for kind, body in analytic_bodies(2):
        for _ in range(350):
            x1, x2 = rng.normal(size=2) * 1.2, rng.normal(size=2) * 1.2
            lam = rng.uniform(0.02, 0.98)
            g1 = gauge_bisect(body, x1, tol).gamma
            g2 = gauge_bisect(body, x2, tol).gamma
            gz = gauge_bisect(body, lam * x1 + (1 - lam) * x2, tol).gamma
            assert gz <= lam * g1 + (1 - lam) * g2 + 3 * tol


def test_lipschitz_sampled(rng):
    tol = 1e-5
    for kind, body in analytic_bodies(2):
        for _ in range(350):
            x1, x2 = rng.normal(size=2) * 1.4, rng.normal(size=2) * 1.4
            g1 = gauge_bisect(body, x1, tol).gamma
            g2 = gauge_bisect(body, x2, tol).gamma
            assert abs(g1 - g2) <= np.linalg.norm(x1 - x2) / body.r + 2 * tol


def test_projection_decrease_lemma(rng):
    horizon = 100
    tol = 1.0 / horizon**2
    ball = Ball(1.0, 2)
    slack = (1.0 * ball.r + 3.0 * ball.D) / (ball.r * horizon**2)
    for _ in range(1000):
        g = rng.normal(size=2)
        g /= np.linalg.norm(g)
        loss = RegularizedLoss(linear_loss(g, ball.D), 1.0, ball.D, ball, tol)
        y = sample_at_gauge(rng, "ball", ball, rng.uniform(1.001, 1.95))
        proj = minkowski_project(ball, y, tol)
        assert loss.value(proj) <= loss.value(y) + slack


def test_regularized_value_examples():
    ball = Ball(1.0, 2)
    loss = RegularizedLoss(linear_loss(np.array([1.0, 0.0]), 0.0), 1.0, 2.0, ball, 1e-9)
    # outside: f + 3GD(gamma-1) = 2 + 6*(2-1)
    assert regularized_value(loss, np.array([2.0, 0.0])) == pytest.approx(8.0, abs=1e-6)
    # inside: untouched
    assert regularized_value(loss, np.array([0.5, 0.0])) == pytest.approx(0.5, abs=1e-12)
    zero = RegularizedLoss(linear_loss(np.zeros(2), 0.0), 1.0, 2.0, ball, 1e-9)
    x_half = np.array([1.5, 0.0])  # gamma = 1.5
    assert regularized_value(zero, x_half) == pytest.approx(3.0, abs=1e-6)


def test_gauge_at_tiny_tolerance_stalls_gracefully():
    # far below float resolution: must terminate and stay accurate
    ball = Ball(1.0, 2)
    ev = gauge_bisect(ball, np.array([1.7, 0.0]), 1e-13)
    assert ev.gamma == pytest.approx(1.7, abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(
    direction=st.floats(0, 2 * math.pi),
    radius=st.floats(0.05, 3.9),
)
def test_ball_gauge_property(direction, radius):
    ball = Ball(1.0, 2)
    x = radius * np.array([math.cos(direction), math.sin(direction)])
    ev = gauge_bisect(ball, x, 1e-7)
    assert abs(ev.gamma - max(1.0, radius)) <= 1e-7
