"""Projection-based baseline: online gradient descent with exact projections.

The baseline plays standard (non-lazy) OGD with the closed-form Euclidean
projection, available on the ball, box, and recentered simplex. It gives
the regret reference that the projection-free learner is compared against,
and doubles as the negative control for adaptivity: a single OGD instance
with a 1/sqrt(T) step cannot track switching losses.
"""

from __future__ import annotations

import math

import numpy as np

from .comparators import BodyHandle, euclidean_project

__all__ = ["run_projected_ogd"]


def run_projected_ogd(handle: BodyHandle, losses, horizon: int) -> dict:
    """OGD with step ``D / (G sqrt(T))`` and exact Euclidean projection."""
    if len(losses) != horizon:
        raise ValueError(f"need {horizon} losses, got {len(losses)}")
    body = handle.body
    if horizon == 0:
        return {
            "xs": np.zeros((0, body.dim)),
            "values": np.zeros(0),
            "calls": np.zeros(0, dtype=int),
            "events": [],
            "y_norms": np.zeros(0),
        }
    g_run = max(lf.G for lf in losses)
    eta = body.D / (g_run * math.sqrt(horizon))
    x = np.zeros(body.dim)
    xs = np.empty((horizon, body.dim))
    vals = np.empty(horizon)
    for t in range(horizon):
        xs[t] = x
        vals[t] = losses[t].value(x)
        x = euclidean_project(handle, x - eta * np.asarray(losses[t].grad(x), dtype=float))
    return {
        "xs": xs,
        "values": vals,
        "calls": np.zeros(horizon, dtype=int),
        "events": [() for _ in range(horizon)],
        "y_norms": np.linalg.norm(xs, axis=1),
    }
