"""Discretised closed curves on the torus lift and their action functional.

A loop is N points in the universal cover with closure q_N = q_0 + 2*pi*h for
an integer homology vector h.  The action uses the midpoint rule, so the
exact 1-form part telescopes to -2*pi*<c, h> independently of the points.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .fields import TWO_PI
from .models import MechanicalLagrangian, lagrangian_terms


@dataclass
class Loop:
    points: np.ndarray  # (N, n) lifted positions
    homology: np.ndarray  # (n,) integers
    period: float

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.homology = np.asarray(self.homology, dtype=int)
        if self.points.ndim != 2:
            raise ValueError("loop points must be a (N, n) array")
        if self.period <= 0.0:
            raise ValueError("loop period must be positive")

    @property
    def segments(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def rotation_vector(self) -> np.ndarray:
        return TWO_PI * self.homology / self.period

    def copy(self) -> "Loop":
        return Loop(self.points.copy(), self.homology.copy(), self.period)

    def with_period(self, period: float) -> "Loop":
        return Loop(self.points.copy(), self.homology.copy(), float(period))

    def midpoints_velocities(self):
        q_next = np.roll(self.points, -1, axis=0)
        q_next[-1] = self.points[0] + TWO_PI * self.homology
        mid = 0.5 * (self.points + q_next)
        dt = self.period / self.segments
        vel = (q_next - self.points) / dt
        return mid, vel, dt

    def to_json(self) -> dict:
        return {
            "N": int(self.segments),
            "T": float(self.period),
            "h": [int(v) for v in self.homology],
            "points": self.points.tolist(),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Loop":
        loop = cls(np.asarray(doc["points"], dtype=float),
                   np.asarray(doc["h"], dtype=int), float(doc["T"]))
        if loop.segments != int(doc["N"]):
            raise ValueError("inconsistent loop document: N does not match points")
        return loop


def save_loop(loop: Loop, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(loop.to_json(), f)


def load_loop(path) -> Loop:
    with open(path, "r", encoding="utf-8") as f:
        return Loop.from_json(json.load(f))


def straight_loop(h, period: float, segments: int, base=None) -> Loop:
    """Uniform-speed straight line from base to base + 2*pi*h."""
    h = np.asarray(h, dtype=int)
    n = len(h)
    base = np.zeros(n) if base is None else np.asarray(base, dtype=float)
    frac = np.arange(segments)[:, None] / segments
    return Loop(base[None, :] + frac * (TWO_PI * h)[None, :], h, period)


def jittered_loop(loop: Loop, rng, amplitude: float = 0.05, modes: int = 6) -> Loop:
    """Add a smooth random displacement (low Fourier modes only)."""
    noise = rng.standard_normal(loop.points.shape)
    spec = np.fft.rfft(noise, axis=0)
    spec[modes:] = 0.0
    smooth = np.fft.irfft(spec, n=loop.segments, axis=0)
    peak = np.max(np.abs(smooth))
    if peak > 0.0:
        smooth *= amplitude / peak
    out = loop.copy()
    out.points = out.points + smooth
    return out


def resample_loop(loop: Loop, segments: int) -> Loop:
    """Linear resampling onto a different segment count (same homology)."""
    if segments == loop.segments:
        return loop.copy()
    closed = np.vstack([loop.points, loop.points[0] + TWO_PI * loop.homology])
    old_t = np.linspace(0.0, 1.0, loop.segments + 1)
    new_t = np.arange(segments) / segments
    pts = np.empty((segments, loop.dim))
    for k in range(loop.dim):
        pts[:, k] = np.interp(new_t, old_t, closed[:, k])
    return Loop(pts, loop.homology.copy(), loop.period)


def _check_loop(loop: Loop):
    if loop.segments < 8:
        raise ValueError("loops need at least 8 segments")


def discrete_action(loop: Loop, model: MechanicalLagrangian, c=None) -> float:
    """Midpoint-rule action of L - c over one period.

    The 1-form term is the exact telescoped value -2*pi*<c, h>.
    """
    _check_loop(loop)
    mid, vel, dt = loop.midpoints_velocities()
    coeff = model.metric_coefficients(mid)
    dv = vel - model.drift
    lsum = float(np.sum(np.sum(coeff * dv * dv, axis=-1) + model.potential.value(mid)))
    action = lsum * dt
    if c is not None:
        action -= TWO_PI * float(np.dot(np.asarray(c, dtype=float), loop.homology))
    return action


def action_gradient(loop: Loop, model: MechanicalLagrangian, c=None) -> np.ndarray:
    """Exact gradient of ``discrete_action`` with respect to every point.

    The telescoped 1-form part is constant in the points, so c never enters.
    """
    _check_loop(loop)
    mid, vel, dt = loop.midpoints_velocities()
    _, lx, lv, _ = lagrangian_terms(model, mid, vel)
    grad = 0.5 * dt * (lx + np.roll(lx, 1, axis=0))
    grad += np.roll(lv, 1, axis=0) - lv
    return grad


def loop_energy_drift(loop: Loop, model: MechanicalLagrangian) -> float:
    """max - min of the Hamiltonian over the loop's segment midpoints."""
    mid, vel, _ = loop.midpoints_velocities()
    coeff = model.metric_coefficients(mid)
    dv = vel - model.drift
    lval = np.sum(coeff * dv * dv, axis=-1) + model.potential.value(mid)
    ham = np.sum(2.0 * coeff * dv * vel, axis=-1) - lval
    return float(np.max(ham) - np.min(ham))
