"""Regret, interval regret, and growth-rate fits.

Interval regrets are evaluated on the dyadic grid by default: all
intervals ``[q 2^k + 1, (q+1) 2^k]`` plus the full horizon, an
O(T log T) family that covers every interval up to a constant. The full
O(T^2) scan is available behind a flag for short horizons. Prefix sums
over the loss parameters make each interval comparator O(d).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..losses import LossSequence
from .comparators import BodyHandle, ComparatorResult, offline_comparator

__all__ = [
    "IntervalRegret",
    "LossPrefix",
    "SlopeFit",
    "LogLinearFit",
    "dyadic_intervals",
    "interval_regret",
    "interval_regret_scan",
    "loglinear_fit",
    "per_segment_regrets",
    "slope_fit",
]


@dataclass(frozen=True)
class IntervalRegret:
    start: int
    end: int
    regret: float
    comparator: ComparatorResult


class LossPrefix:
    """Prefix sums over a loss sequence plus a player-loss vector."""

    def __init__(self, seq: LossSequence, player_losses: np.ndarray) -> None:
        t = len(seq)
        if player_losses.shape != (t,):
            raise ValueError("player losses must have one entry per round")
        self.seq = seq
        d = seq.params.shape[1] if t else 0
        self.param_pref = np.zeros((t + 1, d))
        self.offset_pref = np.zeros(t + 1)
        self.sq_pref = np.zeros(t + 1)
        self.player_pref = np.zeros(t + 1)
        if t:
            np.cumsum(seq.params, axis=0, out=self.param_pref[1:])
            np.cumsum(seq.offsets, out=self.offset_pref[1:])
            np.cumsum((seq.params * seq.params).sum(axis=1), out=self.sq_pref[1:])
            np.cumsum(player_losses, out=self.player_pref[1:])

    def player_loss(self, s: int, t: int) -> float:
        return float(self.player_pref[t] - self.player_pref[s - 1])

    def param_sum(self, s: int, t: int) -> np.ndarray:
        return self.param_pref[t] - self.param_pref[s - 1]

    def offset_sum(self, s: int, t: int) -> float:
        return float(self.offset_pref[t] - self.offset_pref[s - 1])

    def sq_sum(self, s: int, t: int) -> float:
        return float(self.sq_pref[t] - self.sq_pref[s - 1])


def _fast_comparator(handle: BodyHandle, prefix: LossPrefix, s: int, t: int) -> ComparatorResult:
    """O(d) interval comparator via the prefix sums; exact-path cases only.

    Falls back to the general comparator when the interval optimum is not
    available in closed form from the aggregates.
    """
    seq = prefix.seq
    n = t - s + 1
    if seq.family == "linear":
        from .comparators import linear_minimizer

        g_sum = prefix.param_sum(s, t)
        point = linear_minimizer(handle, g_sum)
        value = float(g_sum @ point) + prefix.offset_sum(s, t)
        method = (
            "vertex_enumeration"
            if handle.kind in ("simplex", "polytope")
            else "linear_closed_form"
        )
        return ComparatorResult(point, value, 0.0, method)
    theta_bar = prefix.param_sum(s, t) / n
    if handle.body._inside(theta_bar):
        # sum (lam/2)|x - th_i|^2 at x = mean: (lam/2)(sum |th_i|^2 - n |mean|^2)
        value = 0.5 * seq.lam * (prefix.sq_sum(s, t) - n * float(theta_bar @ theta_bar))
        return ComparatorResult(theta_bar, value + prefix.offset_sum(s, t), 0.0, "quadratic_interior")
    return offline_comparator(handle, seq, s, t)


def interval_regret(
    handle: BodyHandle, prefix: LossPrefix, s: int, t: int
) -> IntervalRegret:
    comp = _fast_comparator(handle, prefix, s, t)
    return IntervalRegret(s, t, prefix.player_loss(s, t) - comp.value, comp)


def dyadic_intervals(horizon: int) -> list[tuple[int, int]]:
    """All intervals ``[q 2^k + 1, (q+1) 2^k]`` inside the horizon, plus [1, T]."""
    out = []
    k = 0
    while (1 << k) <= horizon:
        step = 1 << k
        out.extend((q * step + 1, (q + 1) * step) for q in range(horizon // step))
        k += 1
    if (1, horizon) not in out:
        out.append((1, horizon))
    return out


def interval_regret_scan(
    handle: BodyHandle,
    seq: LossSequence,
    player_losses: np.ndarray,
    full: bool = False,
) -> tuple[IntervalRegret, list[IntervalRegret]]:
    """Worst-interval regret over the dyadic grid (or every interval).

    The full scan is quadratic and therefore limited to horizons of at
    most 2000 rounds.
    """
    t_max = len(seq)
    if t_max == 0:
        raise ValueError("empty trajectory")
    if full and t_max > 2000:
        raise ValueError("full interval scan is limited to horizons <= 2000")
    prefix = LossPrefix(seq, np.asarray(player_losses, dtype=float))
    if full:
        pairs = [(s, t) for s in range(1, t_max + 1) for t in range(s, t_max + 1)]
    else:
        pairs = dyadic_intervals(t_max)
    results = [interval_regret(handle, prefix, s, t) for s, t in pairs]
    best = max(results, key=lambda r: r.regret)
    return best, results


def per_segment_regrets(
    handle: BodyHandle, seq: LossSequence, player_losses: np.ndarray
) -> list[IntervalRegret]:
    """Regret on each stationary segment of a piecewise sequence."""
    prefix = LossPrefix(seq, np.asarray(player_losses, dtype=float))
    starts = list(seq.segment_starts) + [len(seq) + 1]
    return [
        interval_regret(handle, prefix, starts[i], starts[i + 1] - 1)
        for i in range(len(starts) - 1)
        if starts[i] <= len(seq)
    ]


# ------------------------------------------------------------------- fits


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r2: float
    n_used: int
    n_excluded: int


@dataclass(frozen=True)
class LogLinearFit:
    intercept: float
    slope: float  # coefficient on log(T)
    r2: float


def _lsq(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    coeffs = np.polyfit(x, y, 1)
    pred = np.polyval(coeffs, x)
    ss_res = float(((y - pred) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(coeffs[0]), float(coeffs[1]), r2


def slope_fit(horizons, regrets) -> SlopeFit:
    """Least-squares slope of log(regret) against log(T).

    Non-positive regrets carry no log-log information (they can occur
    against dyadic comparators) and are excluded with a warning.
    """
    horizons = np.asarray(horizons, dtype=float)
    regrets = np.asarray(regrets, dtype=float)
    keep = regrets > 0
    n_excluded = int((~keep).sum())
    if n_excluded:
        warnings.warn(f"excluding {n_excluded} non-positive regret values from the log-log fit")
    if keep.sum() < 2:
        raise ValueError("need at least two positive regret values to fit a slope")
    slope, intercept, r2 = _lsq(np.log(horizons[keep]), np.log(regrets[keep]))
    return SlopeFit(slope, intercept, r2, int(keep.sum()), n_excluded)


def loglinear_fit(horizons, regrets) -> LogLinearFit:
    """Fit ``regret ~ a + b log(T)`` (for logarithmic-regret claims)."""
    horizons = np.asarray(horizons, dtype=float)
    regrets = np.asarray(regrets, dtype=float)
    slope, intercept, r2 = _lsq(np.log(horizons), regrets)
    return LogLinearFit(intercept, slope, r2)
