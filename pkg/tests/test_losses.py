"""Loss generators: Lipschitz certification, non-negativity, determinism."""

import numpy as np
import pytest

from gaugeoco import LossSpec, generate_losses
from gaugeoco.losses import segment_starts_for
from gaugeoco.rand import rng_stream


def test_stationary_linear_example():
    seq = generate_losses(
        LossSpec(family="linear", directions=((1.0, 0.0),)), 0, 10, 2, diameter=2.0
    )
    # offset D*|g| = 2, so the loss at the ball's far pole is still positive
    assert seq[0].value(np.array([-1.0, 0.0])) == pytest.approx(1.0)
    assert seq.G == 1.0 and seq.family == "linear"


def test_piecewise_theta_echo():
    spec = LossSpec(
        family="quadratic",
        mode="piecewise",
        thetas=((0.5, 0.0), (-0.5, 0.0)),
        boundaries=(1, 501),
    )
    seq = generate_losses(spec, 0, 1000, 2, diameter=2.0)
    assert seq.segment_starts == (1, 501)
    assert np.allclose(seq.params[0], [0.5, 0.0])
    assert np.allclose(seq.params[499], [0.5, 0.0])
    assert np.allclose(seq.params[500], [-0.5, 0.0])


def test_seed_determinism():
    spec = LossSpec(family="linear", mode="piecewise", n_segments=5, G=2.0)
    a = generate_losses(spec, 42, 200, 3, diameter=2.0)
    b = generate_losses(spec, 42, 200, 3, diameter=2.0)
    assert np.array_equal(a.params, b.params)
    c = generate_losses(spec, 43, 200, 3, diameter=2.0)
    assert not np.array_equal(a.params, c.params)


def test_lipschitz_and_nonnegativity_sampled():
    rng = rng_stream(50)
    d_, diam = 3, 2.0
    for spec in (
        LossSpec(family="linear", mode="piecewise", n_segments=4, G=1.5),
        LossSpec(family="quadratic", mode="piecewise", n_segments=4, lam=2.0, offset=0.5),
    ):
        seq = generate_losses(spec, 7, 100, d_, diam)
        for t in (0, 37, 99):
            loss = seq[t]
            for _ in range(200):
                x = rng.normal(size=d_)
                x *= rng.uniform(0, 2 * diam) / np.linalg.norm(x)
                g = loss.grad(x)
                assert np.linalg.norm(g) <= loss.G + 1e-9
                if np.linalg.norm(x) <= diam:
                    assert loss.value(x) >= -1e-12
                # gradient consistent with central differences
                h = 1e-6
                for i in range(d_):
                    e = np.zeros(d_)
                    e[i] = h
                    fd = (loss.value(x + e) - loss.value(x - e)) / (2 * h)
                    assert fd == pytest.approx(g[i], rel=1e-5, abs=1e-5)


def test_quadratic_G_certified_on_2D_ball():
    spec = LossSpec(family="quadratic", thetas=((0.5, 0.0),), lam=2.0)
    seq = generate_losses(spec, 0, 10, 2, diameter=2.0)
    assert seq[0].G == pytest.approx(2.0 * (2 * 2.0 + 0.5))
    assert seq.lam == 2.0


def test_generation_errors():
    with pytest.raises(ValueError):
        generate_losses(
            LossSpec(family="linear", directions=((3.0, 0.0),), G=1.0), 0, 10, 2, 2.0
        )
    with pytest.raises(ValueError):
        generate_losses(LossSpec(family="quadratic", offset=-1.0), 0, 10, 2, 2.0)
    with pytest.raises(ValueError):
        LossSpec(family="cubic")
    with pytest.raises(ValueError):
        segment_starts_for(LossSpec(family="linear", mode="piecewise", boundaries=(1, 5, 5)), 10)
    with pytest.raises(ValueError):
        segment_starts_for(LossSpec(family="linear", mode="piecewise", boundaries=(1, 50)), 10)
    with pytest.raises(ValueError):
        segment_starts_for(LossSpec(family="linear", mode="piecewise"), 10)


def test_segment_starts_variants():
    assert segment_starts_for(LossSpec(mode="stationary"), 100) == (1,)
    assert segment_starts_for(
        LossSpec(mode="piecewise", segment_length=25), 100
    ) == (1, 26, 51, 76)
    assert segment_starts_for(LossSpec(mode="piecewise", n_segments=4), 100) == (
        1,
        26,
        51,
        76,
    )
