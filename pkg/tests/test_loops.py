import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matherkit import Loop, action_gradient, discrete_action, straight_loop
from matherkit.fields import TWO_PI
from matherkit.loops import jittered_loop, load_loop, resample_loop, save_loop


def random_loop(rng, n=2, segments=32, h=(1, 0), period=5.0, amp=0.4):
    base = straight_loop(np.asarray(h[:n]), period, segments)
    return jittered_loop(base, rng, amp)


def test_rotation_vector_identity():
    loop = straight_loop([2, -1], 4.0, 16)
    assert loop.rotation_vector == pytest.approx(TWO_PI * np.array([2, -1]) / 4.0)


def test_needs_at_least_eight_segments(model2):
    tiny = straight_loop([1, 0], 1.0, 4)
    with pytest.raises(ValueError):
        discrete_action(tiny, model2, None)


def test_constant_loop_zero_action(model2):
    loop = Loop(np.zeros((16, 2)), np.zeros(2, dtype=int), 3.0)
    assert discrete_action(loop, model2, [0.0, 0.0]) == 0.0


def test_uniform_kinetic_loop_exact():
    # pure kinetic model via the pendulum channel core: straight loop in x1
    # at the bottom of the well has action (2 pi / T)^2 * T from the metric
    # plus the exact average of the cosine well, which is 1 per period
    from matherkit import ChannelModelSpec, build_channel_model

    model = build_channel_model(ChannelModelSpec(n=2))
    T = 3.7
    loop = straight_loop([1, 0], T, 64)
    expected = (TWO_PI / T) ** 2 * T + T  # kinetic + mean well height 1
    assert discrete_action(loop, model, None) == pytest.approx(expected, rel=1e-12)


def test_telescoping_exact(model2, rng):
    loop = random_loop(rng)
    a0 = discrete_action(loop, model2, None)
    for _ in range(5):
        c = rng.standard_normal(2) * 2.0
        delta = discrete_action(loop, model2, c) - a0
        assert delta == pytest.approx(-TWO_PI * float(np.dot(c, loop.homology)), abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1),
       h1=st.integers(-2, 2), h2=st.integers(-2, 2),
       shift1=st.integers(-3, 3), shift2=st.integers(-3, 3))
def test_deck_transformation_invariance(model2, seed, h1, h2, shift1, shift2):
    rng = np.random.default_rng(seed)
    loop = random_loop(rng, h=(h1, h2))
    base = discrete_action(loop, model2, [0.3, -0.1])
    moved = loop.copy()
    moved.points = moved.points + TWO_PI * np.array([shift1, shift2])
    assert discrete_action(moved, model2, [0.3, -0.1]) == pytest.approx(base, rel=1e-10, abs=1e-10)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), roll=st.integers(1, 31))
def test_cyclic_relabeling_invariance(model2, seed, roll):
    rng = np.random.default_rng(seed)
    loop = random_loop(rng)
    base = discrete_action(loop, model2, None)
    rolled = loop.copy()
    rolled.points = np.roll(loop.points, -roll, axis=0)
    # rolling moves the lift: re-anchor the wrapped points by the deck shift
    rolled.points[-roll:] += TWO_PI * loop.homology
    assert discrete_action(rolled, model2, None) == pytest.approx(base, rel=1e-10, abs=1e-10)


def test_gradient_matches_finite_differences(model2, drift_model, rng):
    eps = 1e-6
    cases = [(model2, (1, 0)), (model2, (0, 1)), (drift_model, (1, 1, 0))]
    worst = 0.0
    for model, h in cases:
        for _ in range(4):
            loop = random_loop(rng, n=model.n, h=h, segments=16, amp=0.3)
            c = rng.standard_normal(model.n) * 0.5
            grad = action_gradient(loop, model, c)
            fd = np.zeros_like(grad)
            for j in range(loop.segments):
                for k in range(model.n):
                    plus, minus = loop.copy(), loop.copy()
                    plus.points[j, k] += eps
                    minus.points[j, k] -= eps
                    fd[j, k] = (discrete_action(plus, model, c)
                                - discrete_action(minus, model, c)) / (2 * eps)
            worst = max(worst, np.max(np.abs(grad - fd)) / max(np.max(np.abs(fd)), 1.0))
    assert worst < 1e-5


def test_gradient_independent_of_class(model2, rng):
    loop = random_loop(rng)
    g0 = action_gradient(loop, model2, None)
    g1 = action_gradient(loop, model2, [1.7, -0.4])
    assert np.array_equal(g0, g1)


def test_gradient_zero_at_fixed_point(model2):
    loop = Loop(np.zeros((16, 2)), np.zeros(2, dtype=int), 2.0)
    assert np.max(np.abs(action_gradient(loop, model2, None))) == 0.0


def test_loop_json_round_trip(tmp_path, rng):
    loop = random_loop(rng)
    path = tmp_path / "loop.json"
    save_loop(loop, path)
    again = load_loop(path)
    assert again.period == loop.period
    assert np.array_equal(again.homology, loop.homology)
    assert np.allclose(again.points, loop.points)


def test_resample_preserves_endpoints(rng):
    loop = random_loop(rng, segments=32)
    fine = resample_loop(loop, 64)
    assert fine.segments == 64
    assert np.allclose(fine.points[0], loop.points[0])
    assert np.array_equal(fine.homology, loop.homology)
