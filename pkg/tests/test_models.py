import json

import numpy as np
import pytest

from matherkit import (
    ChannelModelSpec,
    ModelConfigError,
    NormBoundError,
    build_channel_model,
    check_lemma_constant,
    eval_lagrangian,
    eval_modified,
    hamiltonian,
    pairing,
    perturb,
)
from matherkit.fields import TWO_PI, TrigPolynomialField
from matherkit.models import channel_layout, shift_potential

TAU = 2.0 * np.pi


def test_channel_plateau_values(model2, spec2):
    # u1 plateaus: 0 on A, K on C, delta on B; u2: 1 on A, 0 elsewhere
    assert eval_lagrangian(model2, [0.0, 0.0], [0.0, 0.0]) == 0.0
    assert eval_lagrangian(model2, [0.0, np.pi / 2], [0.0, 0.0]) == 100.0
    assert eval_lagrangian(model2, [0.0, np.pi], [0.0, 0.0]) == 0.5
    # u2 = 1 exactly on channel A
    assert eval_lagrangian(model2, [np.pi, 0.0], [0.0, 0.0]) == 2.0


def test_metric_plateaus_exact(model2):
    pts = np.array([[0.3, 0.0], [0.3, np.pi], [0.3, np.pi / 2]])
    coeff = model2.metric_coefficients(pts)
    # channel A: identity; B1: (1/4, 1/8) as coefficients squared; C: K^2
    assert coeff[0] == pytest.approx([1.0, 1.0], abs=0.0)
    assert coeff[1] == pytest.approx([1.0 / 16.0, 1.0 / 64.0], abs=0.0)
    assert coeff[2] == pytest.approx([1.0e4, 1.0e4], abs=0.0)


def test_metric_profile_squared_reading():
    spec = ChannelModelSpec(n=2, metric_profile="a_squared")
    model = build_channel_model(spec)
    coeff = model.metric_coefficients(np.array([[0.3, np.pi]]))
    assert coeff[0] == pytest.approx([1.0 / 4.0, 1.0 / 8.0], rel=1e-15)


def test_eval_examples_drift(drift_model):
    # drift term vanishes at v1 = 1; barrier channel floor delta
    assert eval_lagrangian(drift_model, [0.0, 0.0, np.pi], [1.0, 0.0, 0.0]) == pytest.approx(0.04)
    assert eval_lagrangian(drift_model, [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]) == pytest.approx(0.5)


def test_periodicity(model2, rng):
    for _ in range(20):
        x = rng.uniform(-10, 10, size=2)
        v = rng.uniform(-3, 3, size=2)
        base = eval_lagrangian(model2, x, v)
        for k in range(2):
            shifted = x.copy()
            shifted[k] += TAU
            assert eval_lagrangian(model2, shifted, v) == pytest.approx(base, rel=1e-12, abs=1e-12)


def test_positive_definiteness_sampled(model2, rng):
    pts = rng.uniform(0, TAU, size=(10_000, 2))
    coeff = model2.metric_coefficients(pts)
    assert np.all(2.0 * coeff > 0.0)


def test_superlinearity_surrogate(model2, rng):
    x = rng.uniform(0, TAU, size=2)
    direction = rng.standard_normal(2)
    direction /= np.linalg.norm(direction)
    ratios = []
    for speed in (10.0, 100.0, 1000.0):
        ratios.append(eval_lagrangian(model2, x, speed * direction) / speed)
    assert ratios[0] < ratios[1] < ratios[2]


def test_reflection_symmetry_n2(model2, rng):
    for _ in range(50):
        x = rng.uniform(-5, 5, size=2)
        v = rng.uniform(-2, 2, size=2)
        assert eval_lagrangian(model2, x, v) == pytest.approx(
            eval_lagrangian(model2, -x, -v), rel=1e-9, abs=1e-9)


def test_potential_minimum_is_zero(model2):
    xs = np.linspace(0, TAU, 101)
    grid = np.stack(np.meshgrid(xs, xs, indexing="ij"), axis=-1).reshape(-1, 2)
    vals = eval_lagrangian(model2, grid, np.zeros_like(grid))
    assert np.min(vals) == pytest.approx(0.0, abs=1e-15)
    assert np.all(vals >= 0.0)


def test_eval_modified(model2):
    assert eval_modified(model2, [1.0, 0.0], [0.0, 0.0], [1.0, 0.0]) == pytest.approx(0.0)
    assert eval_modified(model2, [0.0, 0.0], [0.7, 0.1], [0.4, -0.2]) == pytest.approx(
        eval_lagrangian(model2, [0.7, 0.1], [0.4, -0.2]))


def test_eval_modified_linearity(model2, rng):
    x = rng.uniform(0, TAU, 2)
    v = rng.uniform(-2, 2, 2)
    c = rng.standard_normal(2)
    lhs = eval_modified(model2, 2 * c, x, v) - eval_modified(model2, c, x, v)
    scale = 1.0 + abs(eval_lagrangian(model2, x, v))
    assert lhs == pytest.approx(-float(np.dot(c, v)), abs=1e-12 * scale)


def test_hamiltonian_values(model2, pendulum_model):
    assert hamiltonian(model2, [0.0, 0.0], [0.0, 0.0]) == 0.0
    # pendulum slice: H(x, v) = v^2 - (1 - cos x)
    assert hamiltonian(pendulum_model, [np.pi], [0.0]) == pytest.approx(-2.0)
    assert hamiltonian(pendulum_model, [0.5], [0.3]) == pytest.approx(
        0.3**2 - (1 - np.cos(0.5)))


def test_pairing():
    assert pairing([1.0, 2.0], [3.0, -1.0]) == pytest.approx(1.0)


def test_layout_positions(spec2, spec3, drift_spec):
    centers = {ch.label: ch.center for ch in channel_layout(spec2)}
    assert centers == pytest.approx({"A": 0.0, "B1": np.pi, "C1": np.pi / 2, "C2": 3 * np.pi / 2})
    centers3 = {ch.label: ch.center for ch in channel_layout(spec3)}
    assert centers3["B1"] == pytest.approx(TAU / 3)
    assert centers3["C2"] == pytest.approx(np.pi)
    drift_centers = {ch.label: ch.center for ch in channel_layout(drift_spec)}
    assert set(drift_centers) == {"A", "B1", "C1", "C2"}


def test_overlap_rejected():
    with pytest.raises(ModelConfigError, match="overlap"):
        build_channel_model(ChannelModelSpec(n=2, half_width=0.7, smoothing=0.3))


def test_bad_spec_values():
    with pytest.raises(ModelConfigError):
        ChannelModelSpec(n=2, delta=(0.9,)).resolved()
    with pytest.raises(ModelConfigError):
        ChannelModelSpec(n=2, smoothing=1.0).resolved()
    with pytest.raises(ModelConfigError):
        ChannelModelSpec(n=2, variant="unknown").resolved()


def test_spec_json_round_trip(spec2):
    doc = json.loads(json.dumps(spec2.to_json()))
    again = ChannelModelSpec.from_json(doc)
    assert again == spec2
    with pytest.raises(ModelConfigError, match="unknown"):
        ChannelModelSpec.from_json({"n": 2, "bogus": 1})


def test_perturb_zero_is_identity(model2, rng):
    v = TrigPolynomialField(np.array([[1.0, 0.0]]), np.array([0.0]), np.array([0.0]), 2)
    out = perturb(model2, v, 1e-3)
    x = rng.uniform(0, TAU, size=(5, 2))
    vel = rng.uniform(-1, 1, size=(5, 2))
    assert eval_lagrangian(out, x, vel) == pytest.approx(eval_lagrangian(model2, x, vel))


def test_perturb_adds_potential(model2):
    eps = 1e-3
    v = TrigPolynomialField(np.array([[1.0, 2.0]]), np.array([eps]), np.array([0.0]), 2)
    out = perturb(model2, v, 10 * eps)
    assert eval_lagrangian(out, [0.0, 0.0], [0.0, 0.0]) == pytest.approx(eps)


def test_perturb_rejects_norm_violation(model2):
    v = TrigPolynomialField(np.array([[1.0, 0.0]]), np.array([0.5]), np.array([0.0]), 2)
    with pytest.raises(NormBoundError, match="exceeds"):
        perturb(model2, v, 1e-3)


def test_random_perturbation_stays_bounded(model2, rng):
    from matherkit import random_trig_potential

    eps = 1e-3
    v = random_trig_potential(2, eps, rng)
    out = perturb(model2, v, eps)
    xs = rng.uniform(0, TAU, size=(2000, 2))
    vals = eval_lagrangian(out, xs, np.zeros_like(xs))
    assert np.min(vals) >= -eps


def test_shift_potential(model2):
    shifted = shift_potential(model2, 0.25)
    assert eval_lagrangian(shifted, [0.0, 0.0], [0.0, 0.0]) == pytest.approx(0.25)


def test_lemma_constant_check(model2):
    check = check_lemma_constant(model2)
    assert check["satisfied"]
    weak = build_channel_model(ChannelModelSpec(n=2, K=1.0))
    assert not check_lemma_constant(weak)["satisfied"]


def test_pendulum_reduction(pendulum_model):
    assert pendulum_model.n == 1
    assert eval_lagrangian(pendulum_model, [np.pi], [0.0]) == pytest.approx(2.0)
    assert eval_lagrangian(pendulum_model, [0.0], [1.0]) == pytest.approx(1.0)
