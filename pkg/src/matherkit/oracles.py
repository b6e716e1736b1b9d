"""Closed-form and quadrature ground truth for the restricted alpha functions.

The pendulum channel decomposes into independent one-dimensional pendulums
L = m v^2 + u (1 - cos x); its minimal-average-action function is flat up to
the separatrix class and is recovered beyond it by inverting the rotation
integral over energy levels.  The geodesic channels have exactly quadratic
alpha functions.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .models import VARIANT_DRIFT, ChannelModelSpec

_QUAD_OPTS = dict(epsabs=1e-12, epsrel=1e-12, limit=200)


def _quad(fn, lo, hi, **kwargs):
    # near the separatrix the integrand has an integrable square-root cusp;
    # adaptive subdivision still converges but flags roundoff-limited panels
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        return quad(fn, lo, hi, **kwargs)


class DegenerateFlatError(ValueError):
    """The pendulum has no potential, so the flat is the whole line."""


class SubspaceError(ValueError):
    """A cohomology class left the subspace where the oracle is defined."""


@dataclass(frozen=True)
class PendulumSpec:
    """One-dimensional pendulum L = mass * v^2 + amplitude * (1 - cos x)."""

    mass: float = 1.0
    amplitude: float = 1.0

    def hamiltonian(self, x: float, p: float) -> float:
        return p * p / (4.0 * self.mass) - self.amplitude * (1.0 - np.cos(x))

    def separatrix_momentum(self, x) -> np.ndarray:
        """Momentum on the zero-energy level, 2*sqrt(m*u*(1-cos x))."""
        return 2.0 * np.sqrt(self.mass * self.amplitude * (1.0 - np.cos(np.asarray(x))))


@dataclass(frozen=True)
class GeodesicChannelSpec:
    """Quadric alpha(c) = -offset + sum_k coeffs[k] * c_k^2."""

    coeffs: tuple[float, ...]
    offset: float

    def alpha(self, c) -> float:
        c = np.asarray(c, dtype=float)
        if len(c) != len(self.coeffs):
            raise ValueError("class/coefficient length mismatch")
        return float(-self.offset + np.sum(np.asarray(self.coeffs) * c * c))

    def lagrangian(self, v) -> float:
        """Fiber Lagrangian whose conjugate is ``alpha``: sum v^2/(4 q) + offset."""
        v = np.asarray(v, dtype=float)
        return float(np.sum(v * v / (4.0 * np.asarray(self.coeffs))) + self.offset)


def _momentum(spec: PendulumSpec, energy: float, x: np.ndarray) -> np.ndarray:
    return 2.0 * np.sqrt(spec.mass * (energy + spec.amplitude * (1.0 - np.cos(x))))


def rotation_of_energy(spec: PendulumSpec, energy: float) -> float:
    """(1/2pi) * loop integral of the momentum on the level H = energy."""
    val, _ = _quad(lambda x: _momentum(spec, energy, x), 0.0, 2.0 * np.pi,
                   points=[np.pi], **_QUAD_OPTS)
    return val / (2.0 * np.pi)


def period_of_energy(spec: PendulumSpec, energy: float) -> float:
    """Period of the rotating orbit on the level H = energy > 0."""
    if energy <= 0.0:
        raise ValueError("rotating orbits require energy > 0")

    def speed_inv(x):
        return np.sqrt(spec.mass / (energy + spec.amplitude * (1.0 - np.cos(x))))

    val, _ = _quad(speed_inv, 0.0, 2.0 * np.pi, points=[np.pi], **_QUAD_OPTS)
    return val


@lru_cache(maxsize=64)
def _flat_boundary_cached(mass: float, amplitude: float) -> float:
    return rotation_of_energy(PendulumSpec(mass, amplitude), 0.0)


def pendulum_flat_boundary(spec: PendulumSpec) -> float:
    """Half-width of the flat: the separatrix action (1/2pi) * loop p dx."""
    if spec.amplitude <= 0.0:
        raise DegenerateFlatError("zero potential amplitude: the flat is all of R")
    return _flat_boundary_cached(spec.mass, spec.amplitude)


def _bisect_energy(fn, target: float, hi: float, rel_tol: float = 1e-10) -> float:
    lo = 0.0
    while fn(hi) < target:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if fn(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rel_tol * max(hi, 1e-30):
            break
    return 0.5 * (lo + hi)


def pendulum_alpha(spec: PendulumSpec, c: float) -> float:
    """Minimal-average-action function of the pendulum at class c.

    Zero inside the flat |c| <= c*; beyond it the unique energy E > 0 with
    rotation integral equal to |c|, found by bisection.
    """
    if not np.isfinite(c):
        raise ValueError("class must be finite")
    c_star = pendulum_flat_boundary(spec)
    ac = abs(float(c))
    if ac <= c_star:
        return 0.0
    hi = (ac + 1.0) ** 2 * max(1.0, 1.0 / (4.0 * spec.mass))
    return _bisect_energy(lambda e: rotation_of_energy(spec, e), ac, hi)


def pendulum_beta(spec: PendulumSpec, rho: float) -> float:
    """Conjugate of ``pendulum_alpha``: minimal average action at rotation rho."""
    r = abs(float(rho))
    if r == 0.0:
        return 0.0
    hi = max(spec.mass * r * r, 1.0)
    energy = _bisect_energy(lambda e: 2.0 * np.pi / period_of_energy(spec, e), r, hi)
    return rotation_of_energy(spec, energy) * r - energy


def _check_subspace(c, n: int, tol: float = 1e-12) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if c.shape != (n,):
        raise SubspaceError(f"expected class of length {n}, got shape {c.shape}")
    if abs(c[-1]) > tol:
        raise SubspaceError(f"class must have vanishing last coordinate, got {c[-1]!r}")
    return c


def alpha_A(c, n: int | None = None) -> float:
    """Restricted alpha of the pendulum channel: a product of unit pendulums."""
    c = np.asarray(c, dtype=float)
    n = len(c) if n is None else n
    c = _check_subspace(c, n)
    pend = PendulumSpec(1.0, 1.0)
    return float(sum(pendulum_alpha(pend, ci) for ci in c[: n - 1]))


def alpha_B(i: int, c, delta: float = 0.5) -> float:
    """Restricted alpha of the i-th geodesic channel (i is 1-based)."""
    c = np.asarray(c, dtype=float)
    n = len(c)
    c = _check_subspace(c, n)
    if not (1 <= i <= n - 1):
        raise IndexError(f"channel index {i} out of range 1..{n - 1}")
    head = c[: n - 1]
    return float(-delta + 16.0 * np.sum(head * head) - 12.0 * head[i - 1] ** 2)


def alpha_B_drift(c, delta: float) -> float:
    """Geodesic-channel alpha for the drifted model on the 3-torus.

    The zero set is the ellipse (c1+1)^2/2 + c2^2/4 = 1/2 + delta.
    """
    c = np.asarray(c, dtype=float)
    if len(c) == 2:
        c = np.array([c[0], c[1], 0.0])
    c = _check_subspace(c, 3)
    return float(c[0] + 0.5 * c[0] ** 2 + 0.25 * c[1] ** 2 - delta)


def alpha_A_drift(c) -> float:
    """Pendulum-channel alpha for the drifted model on the 3-torus."""
    c = np.asarray(c, dtype=float)
    if len(c) == 2:
        c = np.array([c[0], c[1], 0.0])
    c = _check_subspace(c, 3)
    free_part = c[0] + 0.5 * c[0] ** 2
    return float(free_part + pendulum_alpha(PendulumSpec(0.5, 1.0), c[1]))


def corner_coordinates(n: int, delta=0.5) -> list[np.ndarray]:
    """The 2^(n-1) simultaneous zeros of all geodesic-channel quadrics.

    For uniform delta = 1/2 the coordinates are +-1/sqrt(8(4n-7)).
    """
    if n < 2:
        raise ValueError("corners require n >= 2")
    deltas = np.asarray(delta, dtype=float)
    if deltas.ndim == 0:
        deltas = np.full(n - 1, float(deltas))
    if deltas.shape != (n - 1,):
        raise ValueError(f"expected {n - 1} delta values")
    total = np.sum(deltas) / (4.0 * (4.0 * n - 7.0))
    sq = (16.0 * total - deltas) / 12.0
    if np.any(sq <= 0.0):
        raise ValueError("delta values too disparate: no symmetric corner exists")
    mags = np.sqrt(sq)
    points = []
    for signs in itertools.product((1.0, -1.0), repeat=n - 1):
        pt = np.zeros(n)
        pt[: n - 1] = np.asarray(signs) * mags
        points.append(pt)
    return points


def channel_alpha_oracle(spec: ChannelModelSpec, c) -> float:
    """max over restricted channels of the closed-form alpha values."""
    spec = spec.resolved()
    c = np.asarray(c, dtype=float)
    if spec.variant == VARIANT_DRIFT:
        return max(alpha_A_drift(c), alpha_B_drift(c, spec.delta[0]))
    vals = [alpha_A(c, spec.n)]
    for i in range(1, spec.n):
        vals.append(alpha_B(i, c, spec.delta[i - 1]))
    return max(vals)


def channel_alpha_table(spec: ChannelModelSpec, c) -> dict[str, float]:
    """Per-channel restricted alpha values keyed by channel label."""
    spec = spec.resolved()
    c = np.asarray(c, dtype=float)
    if spec.variant == VARIANT_DRIFT:
        return {"A": alpha_A_drift(c), "B1": alpha_B_drift(c, spec.delta[0])}
    table = {"A": alpha_A(c, spec.n)}
    for i in range(1, spec.n):
        table[f"B{i}"] = alpha_B(i, c, spec.delta[i - 1])
    return table
