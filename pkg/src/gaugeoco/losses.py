"""Loss functions and the adversarial loss generators used by the harness.

Losses are defined on all of space (not just the body), non-negative, and
carry their Lipschitz constant plus an optional strong-convexity modulus.
Two families are generated: linear with an offset that keeps the loss
non-negative on the origin-centered ball of radius D, and quadratics
around a (possibly moving) center with the Lipschitz constant certified on
the ball of radius 2D. Piecewise specs switch the parameters at segment
boundaries; a fixed seed reproduces the exact same sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .rand import rng_stream

__all__ = [
    "LossFunction",
    "LossSpec",
    "LossSequence",
    "generate_losses",
    "linear_loss",
    "quadratic_loss",
]


@dataclass(frozen=True)
class LossFunction:
    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    G: float
    lam: float = 0.0  # strong-convexity modulus; 0 for general convex


def linear_loss(g: np.ndarray, offset: float) -> LossFunction:
    g = np.asarray(g, dtype=float)
    g.setflags(write=False)
    return LossFunction(
        value=lambda x: float(g @ x) + offset,
        grad=lambda x: g,
        G=float(np.linalg.norm(g)),
    )


def quadratic_loss(theta: np.ndarray, lam: float, offset: float, G: float) -> LossFunction:
    theta = np.asarray(theta, dtype=float)
    theta.setflags(write=False)
    return LossFunction(
        value=lambda x: 0.5 * lam * float((x - theta) @ (x - theta)) + offset,
        grad=lambda x: lam * (x - theta),
        G=float(G),
        lam=float(lam),
    )


@dataclass(frozen=True)
class LossSpec:
    """Declarative description of a loss sequence.

    ``directions`` / ``thetas`` cycle across segments when given; otherwise
    each segment draws fresh parameters from the seeded stream. Segments
    come from ``boundaries`` (explicit 1-based segment starts), or
    ``n_segments`` (equal split), or ``segment_length``.
    """

    family: str = "linear"  # linear | quadratic
    mode: str = "stationary"  # stationary | piecewise
    G: float = 1.0
    lam: float = 1.0
    offset: float = 0.0
    directions: tuple[tuple[float, ...], ...] | None = None
    thetas: tuple[tuple[float, ...], ...] | None = None
    theta_scale: float = 0.5
    boundaries: tuple[int, ...] | None = None
    n_segments: int | None = None
    segment_length: int | None = None

    def __post_init__(self) -> None:
        if self.family not in ("linear", "quadratic"):
            raise ValueError(f"unknown loss family {self.family!r}")
        if self.mode not in ("stationary", "piecewise"):
            raise ValueError(f"unknown loss mode {self.mode!r}")


@dataclass(frozen=True)
class LossSequence(Sequence):
    """A realized loss sequence plus the structure the harness needs.

    Indexing returns the round's :class:`LossFunction`. The parameter
    arrays (one row per round) let comparators aggregate intervals in
    closed form instead of re-evaluating closures.
    """

    losses: tuple[LossFunction, ...]
    family: str
    G: float
    lam: float
    params: np.ndarray  # (T, d): gradient vectors or quadratic centers
    offsets: np.ndarray  # (T,)
    segment_starts: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.losses)

    def __getitem__(self, t):
        return self.losses[t]


def segment_starts_for(spec: LossSpec, horizon: int) -> tuple[int, ...]:
    """Resolve the 1-based segment start rounds for a horizon."""
    if spec.mode == "stationary":
        return (1,)
    if spec.boundaries is not None:
        starts = tuple(int(b) for b in spec.boundaries)
        if starts[0] != 1 or any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("boundaries must start at 1 and increase strictly")
        if starts[-1] > horizon:
            raise ValueError("boundaries exceed the horizon")
        return starts
    if spec.segment_length is not None:
        if spec.segment_length < 1:
            raise ValueError("segment_length must be >= 1")
        return tuple(range(1, horizon + 1, spec.segment_length))
    if spec.n_segments is not None:
        n = max(1, min(spec.n_segments, horizon))
        length = horizon // n
        return tuple(1 + i * length for i in range(n))
    raise ValueError("piecewise spec needs boundaries, n_segments, or segment_length")


def generate_losses(
    spec: LossSpec, seed: int, horizon: int, dim: int, diameter: float
) -> LossSequence:
    """Realize a loss sequence of length ``horizon``.

    Raises at generation time if explicit parameters violate the Lipschitz
    target or non-negativity, rather than letting a bad sequence run.
    """
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    rng = rng_stream(seed, 0)
    starts = segment_starts_for(spec, horizon) if horizon > 0 else (1,)

    seg_params: list[np.ndarray] = []
    for s in range(len(starts)):
        if spec.family == "linear":
            if spec.directions is not None:
                g = np.asarray(spec.directions[s % len(spec.directions)], dtype=float)
                if g.shape != (dim,):
                    raise ValueError("direction dimension mismatch")
                if np.linalg.norm(g) > spec.G + 1e-12:
                    raise ValueError("explicit direction exceeds the Lipschitz target G")
            else:
                g = rng.normal(size=dim)
                g *= spec.G / np.linalg.norm(g)
            seg_params.append(g)
        else:
            if spec.thetas is not None:
                th = np.asarray(spec.thetas[s % len(spec.thetas)], dtype=float)
                if th.shape != (dim,):
                    raise ValueError("theta dimension mismatch")
            else:
                th = rng.normal(size=dim)
                th *= spec.theta_scale * rng.uniform(0.2, 1.0) / np.linalg.norm(th)
            seg_params.append(th)

    if spec.family == "quadratic":
        if spec.offset < 0:
            raise ValueError("quadratic offset must be non-negative for a non-negative loss")
        if spec.lam <= 0:
            raise ValueError("quadratic losses need a positive strong-convexity modulus")
        max_theta = max(float(np.linalg.norm(p)) for p in seg_params)
        g_cert = spec.lam * (2.0 * diameter + max_theta)

    seg_losses: list[LossFunction] = []
    for p in seg_params:
        if spec.family == "linear":
            seg_losses.append(linear_loss(p, diameter * float(np.linalg.norm(p))))
        else:
            seg_losses.append(quadratic_loss(p, spec.lam, spec.offset, g_cert))

    losses: list[LossFunction] = []
    params = np.zeros((horizon, dim))
    offsets = np.zeros(horizon)
    seg = 0
    for t in range(1, horizon + 1):
        while seg + 1 < len(starts) and starts[seg + 1] <= t:
            seg += 1
        losses.append(seg_losses[seg])
        params[t - 1] = seg_params[seg]
        offsets[t - 1] = (
            diameter * float(np.linalg.norm(seg_params[seg]))
            if spec.family == "linear"
            else spec.offset
        )

    g_seq = (
        max((lf.G for lf in seg_losses), default=spec.G)
        if spec.family == "linear"
        else (seg_losses[0].G if seg_losses else spec.G)
    )
    return LossSequence(
        losses=tuple(losses),
        family=spec.family,
        G=float(g_seq),
        lam=spec.lam if spec.family == "quadratic" else 0.0,
        params=params,
        offsets=offsets,
        segment_starts=starts if horizon > 0 else (1,),
    )
