"""Gauge evaluation and radial projection by bisection over membership queries.

The gauge of a point is the smallest factor ``c >= 1`` such that ``x / c``
lies in the body; the radial projection divides by it. Both are computed by
binary search along the segment from the origin to ``x``: the bracket starts
at the origin (inside) and ``x`` (outside), and each oracle query halves it.

Two stopping rules are used, because the two quantities have different
accuracies per bracket length. Projection mode stops when the bracket length
along the ray is at most the tolerance. Gauge mode stops when the gauge
uncertainty implied by the bracket, ``1/s_in - 1/s_out`` over the scaling
factors, is at most the tolerance. The reported gauge comes from the inner
bracket endpoint, so the reported projection always lies inside the body;
feasibility is preferred over one-sided error.

Everything here is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bodies import ConvexBody

__all__ = [
    "GaugeEvaluation",
    "RegularizedLoss",
    "gauge_bisect",
    "gauge_call_budget",
    "minkowski_project",
    "projection_call_budget",
    "regularized_value",
]


@dataclass(frozen=True)
class GaugeEvaluation:
    """Approximate gauge value, the matching radial projection, and call cost."""

    gamma: float
    projection: np.ndarray
    calls_used: int
    tolerance: float


def gauge_call_budget(body: ConvexBody, tol: float) -> int:
    """Worst-case oracle calls for a gauge evaluation at tolerance ``tol``."""
    return math.ceil(math.log2(2.0 * body.D**2 / (body.r**2 * tol))) + 1


def projection_call_budget(body: ConvexBody, tol: float) -> int:
    """Worst-case oracle calls for a radial projection at tolerance ``tol``."""
    return math.ceil(math.log2(2.0 * body.D / tol)) + 1


def _check_query(x: np.ndarray, tol: float) -> None:
    if not 0.0 < tol < 1.0:
        raise ValueError(f"tolerance must lie in (0, 1), got {tol}")
    if not np.all(np.isfinite(x)):
        raise ValueError("query point must be finite")


def _bisect(
    body: ConvexBody,
    x: np.ndarray,
    tol: float,
    project_mode: bool,
    check_inside: bool = True,
) -> tuple[float, int]:
    """Core search. Returns ``(gamma, calls)``.

    When ``check_inside`` is false the initial membership query on ``x`` is
    skipped; the search still behaves correctly for points inside the body
    (the inner endpoint walks to 1 and the gauge comes out within ``tol``
    of 1), which lets finite-difference callers avoid redundant queries.
    """
    calls = 0
    if check_inside:
        calls = 1
        if body.contains(x):
            return 1.0, calls

    s_in, s_out = 0.0, 1.0
    xnorm = math.sqrt(float(x @ x)) if project_mode else 0.0
    while True:
        s_mid = 0.5 * (s_in + s_out)
        if s_mid <= s_in or s_mid >= s_out:
            break  # bracket at float resolution; tolerance unreachable
        calls += 1
        if body.contains(s_mid * x):
            s_in = s_mid
        else:
            s_out = s_mid
        if project_mode:
            if (s_out - s_in) * xnorm <= tol:
                break
        elif s_in > 0.0 and (1.0 / s_in - 1.0 / s_out) <= tol:
            break
    if s_in <= 0.0:
        raise ArithmeticError("bisection failed to find an interior bracket point")
    return 1.0 / s_in, calls


def gauge_bisect(body: ConvexBody, x: np.ndarray, tol: float) -> GaugeEvaluation:
    """Compute the gauge of ``x`` to within ``tol``.

    One membership query short-circuits points already inside the body,
    where the gauge is exactly 1. Outside, the returned value is an upper
    bracket within ``tol`` of the true gauge, and the returned projection
    ``x / gamma`` lies in the body.
    """
    x = np.asarray(x, dtype=float)
    _check_query(x, tol)
    gamma, calls = _bisect(body, x, tol, project_mode=False)
    if gamma == 1.0:
        return GaugeEvaluation(1.0, x.copy(), calls, tol)
    return GaugeEvaluation(gamma, x / gamma, calls, tol)


def minkowski_project(body: ConvexBody, x: np.ndarray, tol: float) -> np.ndarray:
    """Radial projection ``x / gamma(x)`` computed to within ``tol``.

    Runs the bisection with the projection-accuracy stopping rule, which
    needs fewer calls than gauge accuracy. Interior points come back
    unchanged.
    """
    x = np.asarray(x, dtype=float)
    _check_query(x, tol)
    gamma, _ = _bisect(body, x, tol, project_mode=True)
    if gamma == 1.0:
        return x.copy()
    return x / gamma


def _gauge_value_nocheck(body: ConvexBody, x: np.ndarray, tol: float) -> tuple[float, int]:
    """Gauge value without the interior short-circuit query (see ``_bisect``)."""
    return _bisect(body, x, tol, project_mode=False, check_inside=False)


@dataclass(frozen=True)
class RegularizedLoss:
    """A base loss plus the gauge penalty ``3 G D (gamma(x) - 1)``.

    The penalty vanishes on the body, grows linearly outside, and its
    coefficient dominates the loss's own Lipschitz constant so descending
    the regularized loss over all of space implicitly respects the body.
    """

    base: object  # anything with .value(x) -> float
    G: float
    D: float
    body: ConvexBody
    tol: float

    def gauge_term(self, x: np.ndarray) -> float:
        ev = gauge_bisect(self.body, x, self.tol)
        return 3.0 * self.G * self.D * (ev.gamma - 1.0)

    def value(self, x: np.ndarray) -> float:
        return float(self.base.value(x)) + self.gauge_term(x)


def regularized_value(loss: RegularizedLoss, x: np.ndarray) -> float:
    """Evaluate the gauge-regularized loss at ``x``."""
    return loss.value(x)
