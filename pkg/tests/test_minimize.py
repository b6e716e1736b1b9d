import numpy as np
import pytest

from matherkit import (
    Loop,
    PendulumSpec,
    action_gradient,
    discrete_action,
    minimize_loop,
    pendulum_beta,
    straight_loop,
)
from matherkit.loops import jittered_loop
from matherkit.minimize import golden_section_min


def test_constant_loop_converges_immediately(model2):
    loop = Loop(np.zeros((32, 2)), np.zeros(2, dtype=int), 4.0)
    report = minimize_loop(loop, model2, None, tol=1e-10)
    assert report.converged
    assert report.iterations == 0
    assert report.action == 0.0
    assert report.energy_drift == 0.0


def test_pendulum_orbit_matches_beta(model2):
    T = 6.0
    report = minimize_loop(straight_loop([1, 0], T, 256), model2, None, tol=1e-8)
    assert report.converged
    beta = pendulum_beta(PendulumSpec(1.0, 1.0), 2.0 * np.pi / T)
    assert report.average_action == pytest.approx(beta, abs=5e-5)


def test_descent_monotone_and_homology_preserved(model2, rng):
    initial = jittered_loop(straight_loop([1, 0], 5.0, 64), rng, 0.5)
    trace = []

    seen = {"prev": np.inf}

    def monitor(report):
        pass

    loop = initial.copy()
    actions = [discrete_action(loop, model2, [0.2, 0.0])]
    report = minimize_loop(loop, model2, [0.2, 0.0], tol=1e-7, max_iter=500)
    assert np.array_equal(report.loop.homology, initial.homology)
    assert report.action <= actions[0] + 1e-12
    # re-run step by step to assert per-step monotonicity
    current = initial.copy()
    prev_action = discrete_action(current, model2, [0.2, 0.0])
    for _ in range(20):
        step_report = minimize_loop(current, model2, [0.2, 0.0], tol=1e-14, max_iter=1)
        assert step_report.action <= prev_action + 1e-12
        prev_action = step_report.action
        current = step_report.loop


def test_converged_means_gradient_below_tol(model2, rng):
    loop = jittered_loop(straight_loop([1, 0], 4.0, 64), rng, 0.3)
    report = minimize_loop(loop, model2, None, tol=1e-7, max_iter=4000)
    assert report.converged
    assert report.gradient_norm <= 1e-7
    assert np.max(np.abs(action_gradient(report.loop, model2, None))) <= 1e-7


def test_energy_drift_bounds(model2):
    # straight geodesic-channel orbit: Hamiltonian exactly constant
    base = np.array([0.0, np.pi])
    report = minimize_loop(straight_loop([1, 0], 2.0, 64, base), model2, [0.5, 0.0],
                           tol=1e-10)
    assert report.energy_drift <= 10 * 1e-10 * 2.0
    # pendulum orbit at moderate period: drift within 10 * tol * T at loose tol
    tol = 1e-4
    T = 6.0
    report = minimize_loop(straight_loop([1, 0], T, 256), model2, None, tol=tol)
    assert report.converged
    assert report.energy_drift <= 10 * tol * T


def test_refinement_order(model2):
    # doubling N changes the converged average action at second order
    T = 6.0
    averages = []
    for segments in (64, 128, 256):
        report = minimize_loop(straight_loop([1, 0], T, segments), model2, None, tol=1e-10,
                               max_iter=8000)
        averages.append(report.average_action)
    d1 = abs(averages[0] - averages[1])
    d2 = abs(averages[1] - averages[2])
    order = np.log2(d1 / d2)
    assert order >= 1.8


def test_divergence_reported(model2):
    bad = straight_loop([1, 0], 3.0, 16)
    bad.points[3] = np.array([np.inf, 0.0])
    from matherkit import MinimizationError

    with pytest.raises(MinimizationError):
        minimize_loop(bad, model2, None)


def test_requires_positive_tol(model2):
    with pytest.raises(ValueError):
        minimize_loop(straight_loop([1, 0], 3.0, 16), model2, None, tol=0.0)


def test_plain_gradient_descent_also_descends(model2, rng):
    loop = jittered_loop(straight_loop([1, 0], 4.0, 32), rng, 0.2)
    a0 = discrete_action(loop, model2, None)
    report = minimize_loop(loop, model2, None, tol=1e-6, max_iter=300, precondition=False)
    assert report.action < a0


def test_golden_section_finds_quadratic_min():
    x, fx = golden_section_min(lambda t: (t - 3.0) ** 2 + 1.0, 0.5, 20.0, rel_tol=1e-6)
    assert x == pytest.approx(3.0, rel=1e-4)
    assert fx == pytest.approx(1.0, abs=1e-8)
