"""Shared samplers and analytic reference formulas for the test suite."""

from __future__ import annotations

import math

import numpy as np
import pytest

from gaugeoco import Ball, Ellipsoid, box_body, rng_stream


def analytic_gauge(kind: str, body, x: np.ndarray) -> float:
    """Closed-form gauge for the analytic test bodies."""
    if kind == "ball":
        return max(1.0, float(np.linalg.norm(x)) / body.radius)
    if kind == "ellipsoid":
        return max(1.0, math.sqrt(float((body.diag * x) @ x)))
    if kind == "box":
        half = -float(body.offsets[0])
        return max(1.0, float(np.abs(x).max()) / half)
    raise ValueError(kind)


def sample_at_gauge(rng, kind: str, body, gauge: float) -> np.ndarray:
    """A point whose exact gauge equals ``gauge`` (direction random)."""
    u = rng.normal(size=body.dim)
    u /= np.linalg.norm(u)
    return gauge * u / analytic_gauge(kind, body, u)


def analytic_bodies_2d():
    return [
        ("ball", Ball(1.0, 2)),
        ("ellipsoid", Ellipsoid(np.array([4.0, 1.0]))),
        ("box", box_body(1.0, 2)),
    ]


def analytic_bodies(dim: int):
    diag = np.linspace(1.0, 4.0, dim)
    return [
        ("ball", Ball(1.0, dim)),
        ("ellipsoid", Ellipsoid(diag)),
        ("box", box_body(1.0, dim)),
    ]


@pytest.fixture
def rng():
    return rng_stream(20240811)
