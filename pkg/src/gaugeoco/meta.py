"""Adaptive-regret meta-algorithms running gauge learners as experts.

Two expert-aggregation schemes:

* FLH, for strongly convex losses: experts are gauge learners with the
  1/(lam t) schedule restarted at their birth round. Expert ``j = q 2^k``
  (q odd) lives for ``2^(k+2) + 1`` rounds, which keeps the working set
  logarithmic. Weights follow an exponential update with the
  exp-concavity constant ``alpha = lam / G^2``; the newborn enters with
  weight ``1/t`` before renormalization.

* EFLH, for general convex losses: experts live on geometric lifespans
  ``4 l_k`` per level ``k``, with ``l_k = floor(2^((1+eps)^k) / 2) + 1``,
  and a signed multiplicative update with learning rate
  ``min(1/2, sqrt(log T / l_k))``. Level-k experts are (re)born whenever
  ``l_k`` divides ``t - 1``. Weight updates need loss differences bounded
  by 1, so raw losses are divided by a scale (default ``G * D``) before
  entering the update; experts themselves always see the raw losses.

Expert steps within a round are independent; updates are merged in expert
id order, so runs are deterministic given the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bodies import ConvexBody
from .learner import EstimatorSpec, LearnerState, learner_step, make_learner
from .losses import LossFunction

__all__ = [
    "EflhState",
    "FlhState",
    "build_expert",
    "eflh_level_lengths",
    "eflh_make",
    "eflh_round",
    "flh_alive_set",
    "flh_lifetime",
    "flh_make",
    "flh_round",
]


# ---------------------------------------------------------------- helpers


def flh_lifetime(j: int) -> int:
    """Rounds expert ``j`` stays alive: ``2^(k+2) + 1`` for ``j = q 2^k``, q odd."""
    if j < 1:
        raise ValueError("expert ids start at 1")
    k = (j & -j).bit_length() - 1
    return 2 ** (k + 2) + 1


def flh_alive_set(t: int) -> set[int]:
    """The working set at round ``t`` implied by birth-at-j plus pruning."""
    return {j for j in range(1, t + 1) if j + flh_lifetime(j) - 1 >= t}


def build_expert(
    body: ConvexBody,
    birth: int,
    horizon: int,
    schedule: str,
    G: float,
    lam: float = 0.0,
    estimator: EstimatorSpec | None = None,
    seed: int = 0,
    level: int = 0,
) -> LearnerState:
    """A fresh gauge learner for one expert slot.

    The expert's internal round counter restarts at 1 (its schedule uses
    local time). A non-positive horizon is rejected outright.
    """
    if horizon < 1:
        raise ValueError(f"expert horizon must be >= 1, got {horizon}")
    return make_learner(
        body, horizon, G, schedule, estimator, lam=lam, seed=seed, seed_extra=(birth, level)
    )


# -------------------------------------------------------------------- FLH


@dataclass
class FlhState:
    body: ConvexBody
    horizon: int
    G: float
    lam: float
    alpha: float
    estimator: EstimatorSpec
    seed: int
    experts: dict[int, LearnerState]
    weights: dict[int, float]
    t: int = 1


def flh_make(
    body: ConvexBody,
    horizon: int,
    G: float,
    lam: float,
    estimator: EstimatorSpec | None = None,
    seed: int = 0,
    alpha: float | None = None,
) -> FlhState:
    if lam <= 0:
        raise ValueError("FLH needs strongly convex losses (lam > 0)")
    estimator = estimator or EstimatorSpec()
    state = FlhState(
        body=body,
        horizon=horizon,
        G=float(G),
        lam=float(lam),
        alpha=float(alpha) if alpha is not None else float(lam) / float(G) ** 2,
        estimator=estimator,
        seed=seed,
        experts={},
        weights={},
    )
    state.experts[1] = build_expert(
        body, 1, horizon, "strongly_convex", G, lam=lam, estimator=estimator, seed=seed
    )
    state.weights[1] = 1.0
    return state


def flh_round(state: FlhState, loss: LossFunction) -> np.ndarray:
    """One FLH round: play the weighted mean, update weights, prune, admit."""
    t = state.t
    ids = sorted(state.experts)
    plays = {j: state.experts[j].x.copy() for j in ids}
    x_bar = np.zeros(state.body.dim)
    for j in ids:
        x_bar += state.weights[j] * plays[j]

    for j in ids:
        learner_step(state.experts[j], loss)

    fvals = {j: float(loss.value(plays[j])) for j in ids}
    fmin = min(fvals.values())
    tilde = {j: state.weights[j] * math.exp(-state.alpha * (fvals[j] - fmin)) for j in ids}
    z = sum(tilde.values())
    tilde = {j: v / z for j, v in tilde.items()}

    # prune experts whose lifetime ends before round t+1, then admit t+1
    for j in ids:
        if j + flh_lifetime(j) - 1 < t + 1:
            del state.experts[j]
            del tilde[j]
    if t + 1 <= state.horizon:
        state.experts[t + 1] = build_expert(
            state.body,
            t + 1,
            state.horizon,
            "strongly_convex",
            state.G,
            lam=state.lam,
            estimator=state.estimator,
            seed=state.seed,
        )
        tilde[t + 1] = 1.0 / t
    z = sum(tilde.values())
    state.weights = {j: v / z for j, v in sorted(tilde.items())}
    state.t += 1
    return x_bar


# ------------------------------------------------------------------- EFLH


def eflh_level_lengths(horizon: int, epsilon: float) -> list[int]:
    """Level lengths ``l_k`` for all admissible levels at this horizon."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    lengths = []
    k = 0
    limit = math.log2(2.0 * horizon)
    while (1.0 + epsilon) ** k <= limit:
        lengths.append(math.floor(2.0 ** ((1.0 + epsilon) ** k) / 2.0) + 1)
        k += 1
    return lengths


@dataclass
class EflhState:
    body: ConvexBody
    horizon: int
    G: float
    epsilon: float
    scale: float
    estimator: EstimatorSpec
    seed: int
    lengths: list[int]
    etas: list[float]
    experts: dict[tuple[int, int], LearnerState]
    logw: dict[tuple[int, int], float]
    t: int = 1
    factor_range: tuple[float, float] = (math.inf, -math.inf)


def eflh_make(
    body: ConvexBody,
    horizon: int,
    G: float,
    epsilon: float,
    estimator: EstimatorSpec | None = None,
    seed: int = 0,
    loss_scale: float | None = None,
) -> EflhState:
    estimator = estimator or EstimatorSpec()
    lengths = eflh_level_lengths(horizon, epsilon)
    etas = [min(0.5, math.sqrt(math.log(horizon) / l)) for l in lengths]
    state = EflhState(
        body=body,
        horizon=horizon,
        G=float(G),
        epsilon=float(epsilon),
        scale=float(loss_scale) if loss_scale is not None else float(G) * body.D,
        estimator=estimator,
        seed=seed,
        lengths=lengths,
        etas=etas,
        experts={},
        logw={},
    )
    for k, l in enumerate(lengths):
        state.experts[(1, k)] = build_expert(
            body, 1, 4 * l, "convex", G, estimator=estimator, seed=seed, level=k
        )
        state.logw[(1, k)] = math.log(etas[k])
    return state


def eflh_round(state: EflhState, loss: LossFunction) -> np.ndarray:
    """One EFLH round: weighted play, signed multiplicative update, churn."""
    t = state.t
    keys = sorted(state.experts)
    lw = np.array([state.logw[key] for key in keys])
    w = np.exp(lw - lw.max())
    w /= w.sum()
    plays = {key: state.experts[key].x.copy() for key in keys}
    x_bar = np.zeros(state.body.dim)
    for key, wi in zip(keys, w):
        x_bar += wi * plays[key]

    for key in keys:
        learner_step(state.experts[key], loss)

    f_bar = float(loss.value(x_bar))
    lo, hi = state.factor_range
    for key in keys:
        diff = (f_bar - float(loss.value(plays[key]))) / state.scale
        factor = 1.0 + state.etas[key[1]] * diff
        if factor <= 0.0:
            raise RuntimeError(
                f"non-positive weight factor {factor} at round {t}; "
                "loss scale too small for the normalization precondition"
            )
        state.logw[key] += math.log(factor)
        lo, hi = min(lo, factor), max(hi, factor)
    state.factor_range = (lo, hi)

    for key in keys:
        birth, k = key
        if birth + 4 * state.lengths[k] - 1 < t + 1:
            del state.experts[key]
            del state.logw[key]
    if t + 1 <= state.horizon:
        for k, l in enumerate(state.lengths):
            if (t - 1) % l == 0:
                key = (t + 1, k)
                state.experts[key] = build_expert(
                    state.body, t + 1, 4 * l, "convex", state.G,
                    estimator=state.estimator, seed=state.seed, level=k,
                )
                state.logw[key] = math.log(state.etas[k])
    state.t += 1
    return x_bar
