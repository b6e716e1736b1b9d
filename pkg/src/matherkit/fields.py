"""Smooth periodic scalar fields used to assemble torus Lagrangians.

Plateau profiles are piecewise constant in one angle, with cosine-smoothstep
transitions of a fixed width placed just outside each plateau core, so the
cores take their nominal values exactly (to the last bit).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


class ModelConfigError(ValueError):
    """Raised when a channel layout or field description is inconsistent."""


def smoothstep(t: np.ndarray) -> np.ndarray:
    """Cosine smoothstep: 0 for t<=0, 1 for t>=1, (1-cos(pi t))/2 between."""
    t = np.clip(t, 0.0, 1.0)
    return 0.5 * (1.0 - np.cos(np.pi * t))


def smoothstep_deriv(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    inside = (t > 0.0) & (t < 1.0)
    out = np.zeros_like(t)
    out[inside] = 0.5 * np.pi * np.sin(np.pi * t[inside])
    return out


@dataclass(frozen=True)
class ConstantProfile:
    """Angle-independent profile (used by degenerate one-channel models)."""

    level: float

    def value(self, theta: np.ndarray) -> np.ndarray:
        return np.full_like(np.asarray(theta, dtype=float), self.level)

    def deriv(self, theta: np.ndarray) -> np.ndarray:
        return np.zeros_like(np.asarray(theta, dtype=float))

    def value_deriv(self, theta: np.ndarray):
        return self.value(theta), self.deriv(theta)


class Profile1D:
    """Periodic piecewise plateau/ramp function of one angle.

    Segments partition [0, 2*pi) after shifting by ``cut`` so the first
    plateau starts at zero; ramps interpolate with the cosine smoothstep.
    """

    def __init__(self, cut, starts, ends, kinds, v0, v1):
        self.cut = float(cut)
        self.starts = np.asarray(starts, dtype=float)
        self.ends = np.asarray(ends, dtype=float)
        self.kinds = np.asarray(kinds, dtype=np.int8)  # 0 plateau, 1 ramp
        self.v0 = np.asarray(v0, dtype=float)
        self.v1 = np.asarray(v1, dtype=float)

    @classmethod
    def from_cores(cls, cores, fill: float, sigma: float, period: float = TWO_PI):
        """Build a profile from labelled plateau cores.

        ``cores`` is a sequence of (label, center, half_width, value).  Between
        cores the profile sits at ``fill``; each core is joined to the fill
        level by a smoothstep of width ``sigma`` immediately outside its edge.
        Cores must stay pairwise disjoint after smoothing.
        """
        if sigma <= 0.0:
            raise ModelConfigError("smoothing width must be positive")
        items = []
        for label, center, hw, value in cores:
            if hw <= 0.0:
                raise ModelConfigError(f"channel {label} has non-positive width")
            items.append((np.mod(float(center), period), label, float(hw), float(value)))
        items.sort(key=lambda it: it[0])
        cut = items[0][0] - items[0][2]
        starts, ends, kinds, v0, v1 = [], [], [], [], []

        def push(a, b, kind, a_val, b_val):
            if b < a - 1e-15:
                raise ModelConfigError("segment with negative length")
            if b <= a:
                return
            starts.append(a)
            ends.append(b)
            kinds.append(kind)
            v0.append(a_val)
            v1.append(b_val)

        m = len(items)
        for idx, (center, label, hw, value) in enumerate(items):
            a = np.mod(center - hw - cut, period) if idx else 0.0
            b = a + 2.0 * hw
            nxt_center, nxt_label, nxt_hw, nxt_value = items[(idx + 1) % m]
            if idx + 1 < m:
                nxt_a = np.mod(nxt_center - nxt_hw - cut, period)
            else:
                nxt_a = period
            gap = nxt_a - b
            if gap < 2.0 * sigma:
                raise ModelConfigError(
                    f"channels {label} and {nxt_label} overlap after smoothing "
                    f"(gap {gap:.6g} < 2*sigma {2.0 * sigma:.6g})"
                )
            push(a, b, 0, value, value)
            push(b, b + sigma, 1, value, fill)
            push(b + sigma, nxt_a - sigma, 0, fill, fill)
            push(nxt_a - sigma, nxt_a, 1, fill, nxt_value)
        return cls(cut, starts, ends, kinds, v0, v1)

    def _locate(self, theta):
        phi = np.mod(np.asarray(theta, dtype=float) - self.cut, TWO_PI)
        idx = np.searchsorted(self.starts, phi, side="right") - 1
        np.minimum(idx, len(self.starts) - 1, out=idx)
        return phi, idx

    def value(self, theta: np.ndarray) -> np.ndarray:
        phi, idx = self._locate(theta)
        out = self.v0[idx].copy()
        ramp = self.kinds[idx] == 1
        if np.any(ramp):
            i = idx[ramp]
            t = (phi[ramp] - self.starts[i]) / (self.ends[i] - self.starts[i])
            out[ramp] = self.v0[i] + (self.v1[i] - self.v0[i]) * (
                0.5 * (1.0 - np.cos(np.pi * t)))
        return out

    def deriv(self, theta: np.ndarray) -> np.ndarray:
        phi, idx = self._locate(theta)
        out = np.zeros_like(phi)
        ramp = self.kinds[idx] == 1
        if np.any(ramp):
            i = idx[ramp]
            width = self.ends[i] - self.starts[i]
            t = (phi[ramp] - self.starts[i]) / width
            out[ramp] = (self.v1[i] - self.v0[i]) * (0.5 * np.pi * np.sin(np.pi * t)) / width
        return out

    def value_deriv(self, theta: np.ndarray):
        """Value and derivative with a single segment lookup."""
        phi, idx = self._locate(theta)
        val = self.v0[idx].copy()
        der = np.zeros_like(phi)
        ramp = self.kinds[idx] == 1
        if np.any(ramp):
            i = idx[ramp]
            width = self.ends[i] - self.starts[i]
            t = (phi[ramp] - self.starts[i]) / width
            jump = self.v1[i] - self.v0[i]
            val[ramp] = self.v0[i] + jump * (0.5 * (1.0 - np.cos(np.pi * t)))
            der[ramp] = jump * (0.5 * np.pi * np.sin(np.pi * t)) / width
        return val, der


def _as_points(x: np.ndarray, n: int):
    pts = np.asarray(x, dtype=float)
    squeeze = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[-1] != n:
        raise ValueError(f"expected points with {n} coordinates, got shape {pts.shape}")
    return pts, squeeze


class ProfileField:
    """Scalar field given by a 1-d profile of a single coordinate."""

    def __init__(self, profile, coord: int, n: int):
        self.profile = profile
        self.coord = int(coord)
        self.n = int(n)

    def value(self, x: np.ndarray) -> np.ndarray:
        return self.profile.value(x[..., self.coord])

    def grad(self, x: np.ndarray) -> np.ndarray:
        g = np.zeros_like(x)
        g[..., self.coord] = self.profile.deriv(x[..., self.coord])
        return g

    def value_deriv_1d(self, x: np.ndarray):
        """(value, d/dcoord) along the active coordinate only."""
        return self.profile.value_deriv(x[..., self.coord])


class ConstantField:
    def __init__(self, level: float, n: int):
        self.level = float(level)
        self.n = int(n)

    def value(self, x: np.ndarray) -> np.ndarray:
        return np.full(x.shape[:-1], self.level)

    def grad(self, x: np.ndarray) -> np.ndarray:
        return np.zeros_like(x)


class ChannelPotentialField:
    """u1(x_axis) + u2(x_axis) * sum over trig coordinates of (1 - cos x_i)."""

    def __init__(self, u1, u2, trig_coords, axis: int, n: int):
        self.u1 = u1
        self.u2 = u2
        self.trig_coords = tuple(int(i) for i in trig_coords)
        self.axis = int(axis)
        self.n = int(n)

    def _trig_sum(self, x):
        if not self.trig_coords:
            return np.zeros(x.shape[:-1])
        cols = x[..., list(self.trig_coords)]
        return np.sum(1.0 - np.cos(cols), axis=-1)

    def value(self, x: np.ndarray) -> np.ndarray:
        theta = x[..., self.axis]
        return self.u1.value(theta) + self.u2.value(theta) * self._trig_sum(x)

    def grad(self, x: np.ndarray) -> np.ndarray:
        theta = x[..., self.axis]
        g = np.zeros_like(x)
        u2 = self.u2.value(theta)
        for i in self.trig_coords:
            g[..., i] = u2 * np.sin(x[..., i])
        g[..., self.axis] += self.u1.deriv(theta) + self.u2.deriv(theta) * self._trig_sum(x)
        return g

    def value_grad(self, x: np.ndarray):
        theta = x[..., self.axis]
        u1, du1 = self.u1.value_deriv(theta)
        u2, du2 = self.u2.value_deriv(theta)
        trig = self._trig_sum(x)
        g = np.zeros_like(x)
        for i in self.trig_coords:
            g[..., i] = u2 * np.sin(x[..., i])
        g[..., self.axis] += du1 + du2 * trig
        return u1 + u2 * trig, g


class TrigPolynomialField:
    """Real trigonometric polynomial sum_k a_k cos<k,x> + b_k sin<k,x>."""

    def __init__(self, wavevectors, cos_coeffs, sin_coeffs, n: int):
        self.wavevectors = np.asarray(wavevectors, dtype=float).reshape(-1, n)
        self.cos_coeffs = np.asarray(cos_coeffs, dtype=float)
        self.sin_coeffs = np.asarray(sin_coeffs, dtype=float)
        self.n = int(n)

    def value(self, x: np.ndarray) -> np.ndarray:
        phase = x @ self.wavevectors.T
        return np.cos(phase) @ self.cos_coeffs + np.sin(phase) @ self.sin_coeffs

    def grad(self, x: np.ndarray) -> np.ndarray:
        phase = x @ self.wavevectors.T
        weights = -np.sin(phase) * self.cos_coeffs + np.cos(phase) * self.sin_coeffs
        return weights @ self.wavevectors

    def value_grad(self, x: np.ndarray):
        phase = x @ self.wavevectors.T
        cp, sp = np.cos(phase), np.sin(phase)
        val = cp @ self.cos_coeffs + sp @ self.sin_coeffs
        weights = -sp * self.cos_coeffs + cp * self.sin_coeffs
        return val, weights @ self.wavevectors

    def coefficient_norm(self) -> float:
        """Upper bound on the sup norm: sum of absolute coefficients."""
        return float(np.sum(np.abs(self.cos_coeffs)) + np.sum(np.abs(self.sin_coeffs)))

    def gradient_norm_bound(self) -> float:
        scale = np.max(np.abs(self.wavevectors), axis=1)
        return float(np.sum((np.abs(self.cos_coeffs) + np.abs(self.sin_coeffs)) * scale))


def field_value_grad(fld, x: np.ndarray):
    """Evaluate (value, grad) of any field, using a combined path when available."""
    vg = getattr(fld, "value_grad", None)
    if vg is not None:
        return vg(x)
    return fld.value(x), fld.grad(x)


class SumField:
    def __init__(self, parts):
        self.parts = list(parts)
        self.n = self.parts[0].n

    def value(self, x: np.ndarray) -> np.ndarray:
        out = self.parts[0].value(x)
        for p in self.parts[1:]:
            out = out + p.value(x)
        return out

    def grad(self, x: np.ndarray) -> np.ndarray:
        out = self.parts[0].grad(x)
        for p in self.parts[1:]:
            out = out + p.grad(x)
        return out

    def value_grad(self, x: np.ndarray):
        val, grad = field_value_grad(self.parts[0], x)
        for p in self.parts[1:]:
            v, g = field_value_grad(p, x)
            val = val + v
            grad = grad + g
        return val, grad


class CallableField:
    """Wrap a user callable; gradients via central differences."""

    def __init__(self, fn, n: int, step: float = 1e-6):
        self.fn = fn
        self.n = int(n)
        self.step = float(step)

    def value(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.fn(x), dtype=float)

    def grad(self, x: np.ndarray) -> np.ndarray:
        g = np.zeros_like(x)
        for k in range(self.n):
            xp = x.copy()
            xm = x.copy()
            xp[..., k] += self.step
            xm[..., k] -= self.step
            g[..., k] = (self.value(xp) - self.value(xm)) / (2.0 * self.step)
        return g
