"""Deterministic random streams.

Philox is counter-based and cheap to key, so every component (loss
adversary, per-expert estimator, perturbations) gets its own stream derived
from the experiment seed plus integer labels. Identical seeds give
identical streams regardless of how many other components exist.
"""

from __future__ import annotations

import numpy as np

__all__ = ["rng_stream"]


def rng_stream(*entropy: int) -> np.random.Generator:
    """A generator keyed by a tuple of non-negative integers."""
    seq = np.random.SeedSequence([int(e) & 0xFFFFFFFF for e in entropy])
    return np.random.Generator(np.random.Philox(seq))
