import numpy as np
import pytest

from matherkit import (
    DegenerateFlatError,
    GeodesicChannelSpec,
    PendulumSpec,
    SubspaceError,
    alpha_A,
    alpha_A_drift,
    alpha_B,
    alpha_B_drift,
    channel_alpha_oracle,
    corner_coordinates,
    pendulum_alpha,
    pendulum_beta,
    pendulum_flat_boundary,
)
from matherkit.models import ChannelModelSpec
from matherkit.oracles import period_of_energy, rotation_of_energy

CSTAR = 4.0 * np.sqrt(2.0) / np.pi


def test_flat_boundary_ten_digits():
    assert pendulum_flat_boundary(PendulumSpec(1.0, 1.0)) == pytest.approx(CSTAR, abs=1e-10)


def test_flat_boundary_scaling():
    # the separatrix action scales like sqrt(mass * amplitude)
    for mass, amp in [(0.25, 1.0), (0.5, 1.0), (2.0, 3.0)]:
        expected = np.sqrt(mass * amp) * CSTAR
        assert pendulum_flat_boundary(PendulumSpec(mass, amp)) == pytest.approx(expected, rel=1e-11)


def test_flat_boundary_degenerate():
    with pytest.raises(DegenerateFlatError):
        pendulum_flat_boundary(PendulumSpec(1.0, 0.0))


def test_separatrix_momentum_zero_energy():
    spec = PendulumSpec(1.3, 0.7)
    xs = np.linspace(0.1, 2 * np.pi - 0.1, 19)
    for x in xs:
        p = spec.separatrix_momentum(x)
        assert spec.hamiltonian(x, p) == pytest.approx(0.0, abs=1e-12)


def test_pendulum_alpha_flat_and_roundtrip():
    spec = PendulumSpec(1.0, 1.0)
    assert pendulum_alpha(spec, 0.0) == 0.0
    # zero on the flat, including its boundary up to quadrature resolution
    assert pendulum_alpha(spec, CSTAR) == pytest.approx(0.0, abs=1e-12)
    assert pendulum_alpha(spec, CSTAR - 1e-9) == 0.0
    energy = pendulum_alpha(spec, 2.5)
    assert energy > 0.0
    assert rotation_of_energy(spec, energy) == pytest.approx(2.5, abs=1e-8)


def test_pendulum_alpha_rejects_nonfinite():
    with pytest.raises(ValueError):
        pendulum_alpha(PendulumSpec(), float("nan"))


def test_pendulum_alpha_convex_nondecreasing(rng):
    spec = PendulumSpec(1.0, 1.0)
    cs = np.sort(rng.uniform(0.0, 4.0, size=60))
    vals = np.array([pendulum_alpha(spec, c) for c in cs])
    assert np.all(np.diff(vals) >= -1e-12)
    mids = np.array([pendulum_alpha(spec, 0.5 * (a + b)) for a, b in zip(cs[:-2], cs[2:])])
    assert np.all(mids <= 0.5 * (vals[:-2] + vals[2:]) + 1e-9)


def test_pendulum_beta_fenchel_pair():
    spec = PendulumSpec(1.0, 1.0)
    rho = 2.0 * np.pi / 6.0
    beta = pendulum_beta(spec, rho)
    # Fenchel-Young equality at the matching class
    energy = None
    lo, hi = 1e-8, 10.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if 2.0 * np.pi / period_of_energy(spec, mid) < rho:
            lo = mid
        else:
            hi = mid
    energy = 0.5 * (lo + hi)
    c = rotation_of_energy(spec, energy)
    assert beta == pytest.approx(c * rho - energy, rel=1e-8)
    assert pendulum_beta(spec, 0.0) == 0.0


def test_alpha_A_values():
    assert alpha_A(np.zeros(2)) == 0.0
    assert alpha_A(np.array([CSTAR, 0.0])) == pytest.approx(0.0, abs=1e-12)
    val = alpha_A(np.array([2.5, 0.1, 0.0]))
    assert val == pytest.approx(pendulum_alpha(PendulumSpec(1.0, 1.0), 2.5))
    with pytest.raises(SubspaceError):
        alpha_A(np.array([0.0, 0.3]))


def test_alpha_B_values():
    assert alpha_B(1, np.array([1.0 / np.sqrt(8.0), 0.0])) == pytest.approx(0.0, abs=1e-15)
    assert alpha_B(1, np.zeros(2)) == pytest.approx(-0.5)
    corner = np.array([1.0 / np.sqrt(40.0), 1.0 / np.sqrt(40.0), 0.0])
    assert alpha_B(1, corner) == pytest.approx(0.0, abs=1e-15)
    assert alpha_B(2, corner) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(IndexError):
        alpha_B(3, corner)


def test_alpha_B_drift_ellipse():
    delta = 0.04
    assert alpha_B_drift([0.0, 2 * np.sqrt(delta), 0.0], delta) == pytest.approx(0.0, abs=1e-15)
    assert alpha_B_drift(np.zeros(3), delta) == pytest.approx(-delta)
    # zero set is (c1+1)^2/2 + c2^2/4 = 1/2 + delta
    c1 = 0.02
    c2 = np.sqrt(4.0 * (0.5 + delta - 0.5 * (c1 + 1.0) ** 2))
    assert alpha_B_drift([c1, c2, 0.0], delta) == pytest.approx(0.0, abs=1e-14)


def test_alpha_B_drift_slope():
    delta = 0.04
    t = 1e-6
    base = alpha_B_drift([0.0, 2 * np.sqrt(delta), 0.0], delta)
    ahead = alpha_B_drift([0.0, 2 * np.sqrt(delta) + t, 0.0], delta)
    assert (ahead - base) / t == pytest.approx(np.sqrt(delta), rel=1e-5)


def test_alpha_A_drift_flat():
    assert alpha_A_drift([0.0, 0.3, 0.0]) == pytest.approx(0.0)
    assert alpha_A_drift([0.2, 0.0, 0.0]) == pytest.approx(0.2 + 0.02)


def test_corner_coordinates():
    pts = corner_coordinates(2)
    assert len(pts) == 2
    mags = 1.0 / np.sqrt(8.0)
    assert sorted(p[0] for p in pts) == pytest.approx([-mags, mags])
    pts3 = corner_coordinates(3)
    assert len(pts3) == 4
    assert abs(pts3[0][0]) == pytest.approx(1.0 / np.sqrt(40.0))
    flat_edge = CSTAR
    for p in pts3:
        for i in (1, 2):
            assert alpha_B(i, p) == pytest.approx(0.0, abs=1e-14)
        assert np.all(np.abs(p[:2]) < flat_edge)
    with pytest.raises(ValueError):
        corner_coordinates(1)


def test_geodesic_channel_fenchel_identity(rng):
    spec = GeodesicChannelSpec((16.0, 4.0), 0.5)
    vs = np.stack(np.meshgrid(np.linspace(-40, 40, 1601), np.linspace(-20, 20, 801),
                              indexing="ij"), axis=-1).reshape(-1, 2)
    lag = vs**2 @ (1.0 / (4.0 * np.array(spec.coeffs))) + spec.offset
    assert lag[0] == pytest.approx(spec.lagrangian(vs[0]))
    for _ in range(5):
        c = rng.uniform(-0.6, 0.6, size=2)
        sup = np.max(vs @ c - lag)
        assert sup == pytest.approx(spec.alpha(c), abs=2e-3)


def test_channel_alpha_oracle_matches_components(spec2):
    c = np.array([0.9, 0.0])
    expected = max(alpha_A(c), alpha_B(1, c))
    assert channel_alpha_oracle(spec2, c) == pytest.approx(expected)
    drift = ChannelModelSpec(n=3, variant="drift", delta=(0.04,))
    c = np.array([0.0, 0.5, 0.0])
    assert channel_alpha_oracle(drift, c) == pytest.approx(
        max(alpha_A_drift(c), alpha_B_drift(c, 0.04)))
