"""Mechanical Tonelli Lagrangians on the n-torus and the channel construction.

A model is L(x, v) = sum_k kappa_k a_k(x)^2 (v_k - w_k)^2 + U(x) with a
diagonal metric, optional constant drift w and a non-negative potential U.
Channel models arrange plateau values of the metric and potential along the
last coordinate: a pendulum channel A, geodesic channels B_i with a soft
metric, and high-barrier bands (the C channels and everything between cores).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .fields import (
    TWO_PI,
    CallableField,
    ChannelPotentialField,
    ConstantField,
    ConstantProfile,
    ModelConfigError,
    Profile1D,
    ProfileField,
    SumField,
    TrigPolynomialField,
    _as_points,
    field_value_grad,
)

VARIANT_LOWEST = "lowest"
VARIANT_DRIFT = "drift"

_SPEC_JSON_FIELDS = ("n", "K", "delta", "half_width", "smoothing", "variant", "metric_profile")


class NormBoundError(ValueError):
    """A perturbation exceeded its declared norm bound."""


@dataclass(frozen=True)
class ChannelModelSpec:
    """Parameters of the channel construction.

    ``metric_profile`` selects how the tabulated soft-channel metric numbers
    are read: ``"a"`` treats them as the diagonal coefficients a_k themselves
    (the reading consistent with the geodesic-channel quadric and the corner
    coordinates, and the default), ``"a_squared"`` treats them as a_k^2.
    """

    n: int
    K: float = 100.0
    delta: Optional[tuple[float, ...]] = None
    half_width: Optional[float] = None
    smoothing: Optional[float] = None
    variant: str = VARIANT_LOWEST
    metric_profile: str = "a"

    def resolved(self) -> "ChannelModelSpec":
        if self.n < 1:
            raise ModelConfigError("dimension n must be >= 1")
        if self.variant not in (VARIANT_LOWEST, VARIANT_DRIFT):
            raise ModelConfigError(f"unknown variant {self.variant!r}")
        if self.metric_profile not in ("a", "a_squared"):
            raise ModelConfigError(f"unknown metric_profile {self.metric_profile!r}")
        if self.variant == VARIANT_DRIFT and self.n != 3:
            raise ModelConfigError("the drift variant is built on the 3-torus")
        if self.K <= 0.0:
            raise ModelConfigError("barrier height K must be positive")
        n_soft = self.num_soft_channels()
        delta = self.delta
        if delta is None:
            delta = (0.5,) * n_soft
        delta = tuple(float(d) for d in delta)
        if len(delta) != n_soft:
            raise ModelConfigError(f"expected {n_soft} delta values, got {len(delta)}")
        for d in delta:
            if not (0.0 < d <= 0.5):
                raise ModelConfigError(f"delta values must lie in (0, 1/2], got {d}")
        hw = self.half_width
        if hw is None:
            hw = np.pi / (8.0 * self.layout_divisor())
        hw = float(hw)
        if hw <= 0.0:
            raise ModelConfigError("half_width must be positive")
        sm = self.smoothing
        if sm is None:
            sm = hw / 4.0
        sm = float(sm)
        if not (0.0 < sm < hw / 2.0):
            raise ModelConfigError("smoothing width must satisfy 0 < sigma < half_width/2")
        return replace(self, delta=delta, half_width=hw, smoothing=sm)

    def num_soft_channels(self) -> int:
        if self.variant == VARIANT_DRIFT:
            return 1
        return max(self.n - 1, 0)

    def layout_divisor(self) -> int:
        # The drift variant keeps the two-channel layout on the last circle.
        return 2 if self.variant == VARIANT_DRIFT else max(self.n, 2)

    def to_json(self) -> dict:
        r = self.resolved()
        return {
            "n": r.n,
            "K": r.K,
            "delta": list(r.delta),
            "half_width": r.half_width,
            "smoothing": r.smoothing,
            "variant": r.variant,
            "metric_profile": r.metric_profile,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ChannelModelSpec":
        unknown = set(doc) - set(_SPEC_JSON_FIELDS)
        if unknown:
            raise ModelConfigError(f"unknown model fields: {sorted(unknown)}")
        if "n" not in doc:
            raise ModelConfigError("model document requires field 'n'")
        kwargs = dict(doc)
        if "delta" in kwargs and kwargs["delta"] is not None:
            kwargs["delta"] = tuple(float(d) for d in kwargs["delta"])
        return cls(**kwargs).resolved()


@dataclass(frozen=True)
class Channel:
    label: str
    kind: str  # "A", "B" or "C"
    index: int  # 1-based for B/C, 0 for A
    center: float


@dataclass(frozen=True)
class ChannelInfo:
    """Layout metadata carried by built models (seeding, pruning, reports)."""

    spec: ChannelModelSpec
    channels: tuple[Channel, ...]
    half_width: float
    smoothing: float
    barrier_coefficient: float  # min over k of kappa_k a_k^2 on a C core
    barrier_potential: float  # u1 on a C core
    trig_coords: tuple[int, ...] = ()
    extra_potential_bound: float = 0.0

    def seed_channels(self) -> tuple[Channel, ...]:
        return tuple(ch for ch in self.channels if ch.kind in ("A", "B"))

    def crossing_count(self) -> int:
        return sum(1 for ch in self.channels if ch.kind == "C")


@dataclass(frozen=True, eq=False)
class MechanicalLagrangian:
    """Diagonal-metric mechanical Lagrangian on the n-torus."""

    n: int
    metric: tuple  # n fields a_k(x) > 0
    drift: np.ndarray  # (n,)
    kinetic_weight: np.ndarray  # (n,)
    potential: object  # field with value/grad
    channel_info: Optional[ChannelInfo] = None

    def __post_init__(self):
        object.__setattr__(self, "drift", np.asarray(self.drift, dtype=float))
        object.__setattr__(self, "kinetic_weight", np.asarray(self.kinetic_weight, dtype=float))

    def metric_coefficients(self, x: np.ndarray) -> np.ndarray:
        """Coefficients of (v_k - w_k)^2, i.e. kappa_k a_k(x)^2, shape (m, n)."""
        pts, _ = _as_points(x, self.n)
        out = np.empty(pts.shape)
        for k in range(self.n):
            fld = self.metric[k]
            if isinstance(fld, ProfileField):
                a = fld.profile.value(pts[:, fld.coord])
            else:
                a = fld.value(pts)
            out[:, k] = self.kinetic_weight[k] * a * a
        return out


def channel_layout(spec: ChannelModelSpec) -> tuple[Channel, ...]:
    spec = spec.resolved()
    if spec.variant == VARIANT_DRIFT:
        return (
            Channel("A", "A", 0, 0.0),
            Channel("B1", "B", 1, np.pi),
            Channel("C1", "C", 1, 0.5 * np.pi),
            Channel("C2", "C", 2, 1.5 * np.pi),
        )
    n = spec.n
    chans = [Channel("A", "A", 0, 0.0)]
    for i in range(1, n):
        chans.append(Channel(f"B{i}", "B", i, TWO_PI * i / n))
    for j in range(1, n + 1):
        chans.append(Channel(f"C{j}", "C", j, (2 * j - 1) * np.pi / n))
    return tuple(chans)


def _metric_table(spec: ChannelModelSpec) -> dict:
    """Per-channel tabulated metric numbers, one value per coordinate."""
    n = spec.n
    table = {}
    if spec.variant == VARIANT_DRIFT:
        table["A"] = np.ones(n)
        table["B1"] = np.array([1.0, 2.0, 1.0])
        c_val = np.full(n, spec.K)
    else:
        table["A"] = np.ones(n)
        for i in range(1, n):
            vals = np.full(n, 1.0 / 8.0)
            vals[i - 1] = 1.0 / 4.0
            table[f"B{i}"] = vals
        c_val = np.full(n, spec.K)
    for ch in channel_layout(spec):
        if ch.kind == "C":
            table[ch.label] = c_val
    return table


def _metric_field_values(spec: ChannelModelSpec, tabulated: np.ndarray) -> np.ndarray:
    """Convert tabulated numbers into a_k field plateau values per the reading."""
    if spec.variant == VARIANT_DRIFT:
        # The drift kinetic term is (1/2) a_k(x) v_k^2 with a_k entering
        # linearly, so the stored field is sqrt of the tabulated value.
        return np.sqrt(tabulated)
    if spec.metric_profile == "a":
        return tabulated
    return np.sqrt(tabulated)


def build_channel_model(spec: ChannelModelSpec) -> MechanicalLagrangian:
    """Assemble the channel Lagrangian for a resolved spec.

    Between channel cores the potential floor and the metric sit at the
    barrier level K; each core is joined to that level by one smoothstep of
    width ``smoothing`` immediately outside its edge.  The cosine well of the
    pendulum channel is switched off in exact counterphase with the rise of
    the potential floor, which keeps every intermediate slice dominated by
    either the pendulum channel or a geodesic channel.
    """
    spec = spec.resolved()
    n = spec.n
    if n == 1:
        # Degenerate case: the bare pendulum L = v^2 + (1 - cos x).
        pend = ChannelPotentialField(ConstantProfile(0.0), ConstantProfile(1.0), (0,), 0, 1)
        return MechanicalLagrangian(
            n=1,
            metric=(ConstantField(1.0, 1),),
            drift=np.zeros(1),
            kinetic_weight=np.ones(1),
            potential=pend,
            channel_info=None,
        )

    channels = channel_layout(spec)
    hw, sigma = spec.half_width, spec.smoothing
    table = _metric_table(spec)

    u1_values = {"A": 0.0}
    u2_values = {"A": 1.0}
    for ch in channels:
        if ch.kind == "B":
            u1_values[ch.label] = spec.delta[ch.index - 1]
            u2_values[ch.label] = 0.0
        elif ch.kind == "C":
            u1_values[ch.label] = spec.K
            u2_values[ch.label] = 0.0

    def cores(values):
        return [(ch.label, ch.center, hw, values[ch.label]) for ch in channels]

    u1 = Profile1D.from_cores(cores(u1_values), fill=spec.K, sigma=sigma)
    u2 = Profile1D.from_cores(cores(u2_values), fill=0.0, sigma=sigma)

    axis = n - 1
    metric_fields = []
    fill_vals = _metric_field_values(spec, np.full(n, spec.K))
    for k in range(n):
        vals = {ch.label: _metric_field_values(spec, table[ch.label])[k] for ch in channels}
        prof = Profile1D.from_cores(cores(vals), fill=fill_vals[k], sigma=sigma)
        metric_fields.append(ProfileField(prof, axis, n))

    if spec.variant == VARIANT_DRIFT:
        trig_coords = (1,)
        drift = np.array([1.0, 0.0, 0.0])
        kinetic = np.full(n, 0.5)
    else:
        trig_coords = tuple(range(n - 1))
        drift = np.zeros(n)
        kinetic = np.ones(n)

    potential = ChannelPotentialField(u1, u2, trig_coords, axis, n)

    c_tab = _metric_field_values(spec, table[next(ch.label for ch in channels if ch.kind == "C")])
    barrier_coeff = float(np.min(kinetic * c_tab**2))
    info = ChannelInfo(
        spec=spec,
        channels=channels,
        half_width=hw,
        smoothing=sigma,
        barrier_coefficient=barrier_coeff,
        barrier_potential=spec.K,
        trig_coords=trig_coords,
    )
    return MechanicalLagrangian(
        n=n,
        metric=tuple(metric_fields),
        drift=drift,
        kinetic_weight=kinetic,
        potential=potential,
        channel_info=info,
    )


def eval_lagrangian(model: MechanicalLagrangian, x, v):
    """L(x, v); accepts single points (n,) or batches (m, n)."""
    pts, squeeze = _as_points(x, model.n)
    vel, _ = _as_points(v, model.n)
    coeff = model.metric_coefficients(pts)
    dv = vel - model.drift
    out = np.sum(coeff * dv * dv, axis=-1) + model.potential.value(pts)
    return float(out[0]) if squeeze else out


def eval_modified(model: MechanicalLagrangian, c, x, v):
    """L(x, v) - <c, v> for a constant cohomology representative."""
    pts, squeeze = _as_points(x, model.n)
    vel, _ = _as_points(v, model.n)
    c = np.asarray(c, dtype=float)
    out = eval_lagrangian(model, pts, vel) - vel @ c
    return float(out[0]) if squeeze else out


def lagrangian_terms(model: MechanicalLagrangian, x: np.ndarray, v: np.ndarray):
    """Batched (L, dL/dx, dL/dv, coefficients) along a discretised loop."""
    dv = v - model.drift
    dv2 = dv * dv
    uval, lx = field_value_grad(model.potential, x)
    coeff = np.empty_like(x)
    for k in range(model.n):
        fld = model.metric[k]
        kw = model.kinetic_weight[k]
        if isinstance(fld, ProfileField):
            a, da = fld.value_deriv_1d(x)
            coeff[:, k] = kw * a * a
            lx[:, fld.coord] += (2.0 * kw) * a * da * dv2[:, k]
        else:
            a = fld.value(x)
            coeff[:, k] = kw * a * a
            lx += (2.0 * kw) * (a * dv2[:, k])[:, None] * fld.grad(x)
    lval = np.sum(coeff * dv2, axis=-1) + uval
    lv = 2.0 * coeff * dv
    return lval, lx, lv, coeff


def hamiltonian(model: MechanicalLagrangian, x, v):
    """H(x, v) = <dL/dv, v> - L, the conserved energy along orbits."""
    pts, squeeze = _as_points(x, model.n)
    vel, _ = _as_points(v, model.n)
    coeff = model.metric_coefficients(pts)
    dv = vel - model.drift
    lv = 2.0 * coeff * dv
    lval = np.sum(coeff * dv * dv, axis=-1) + model.potential.value(pts)
    out = np.sum(lv * vel, axis=-1) - lval
    return float(out[0]) if squeeze else out


def pairing(c, rho) -> float:
    """De Rham pairing of a constant-form class with a rotation vector."""
    return float(np.dot(np.asarray(c, dtype=float), np.asarray(rho, dtype=float)))


def random_trig_potential(n: int, sup_norm: float, rng, max_harmonic: int = 3) -> TrigPolynomialField:
    """Random trigonometric polynomial with coefficient-sum norm ``sup_norm``."""
    waves = []
    for k in itertools.product(range(-max_harmonic, max_harmonic + 1), repeat=n):
        if all(v == 0 for v in k):
            continue
        # each cos/sin pair appears once: keep lexicographically positive k
        if k < tuple(-v for v in k):
            continue
        waves.append(k)
    waves = np.asarray(waves, dtype=float)
    a = rng.standard_normal(len(waves))
    b = rng.standard_normal(len(waves))
    total = np.sum(np.abs(a)) + np.sum(np.abs(b))
    if total == 0.0:
        a = np.ones(len(waves))
        total = float(len(waves))
    scale = sup_norm / total
    return TrigPolynomialField(waves, a * scale, b * scale, n)


def _sample_grid(n: int, resolution: int) -> np.ndarray:
    axes = [np.linspace(0.0, TWO_PI, resolution, endpoint=False)] * n
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def measure_field_norms(field, n: int, resolution: int = 48) -> tuple[float, float]:
    """Sampled sup norm of a field and of its first derivatives."""
    if n >= 3:
        resolution = min(resolution, 20)
    pts = _sample_grid(n, resolution)
    vals = field.value(pts)
    grads = field.grad(pts)
    return float(np.max(np.abs(vals))), float(np.max(np.abs(grads)))


def perturb(model: MechanicalLagrangian, v_field, eps_bound: float) -> MechanicalLagrangian:
    """Add a potential perturbation; metric and drift are untouched.

    The perturbation is rejected when its sampled sup norm or gradient sup
    norm exceeds ``eps_bound``.
    """
    if callable(v_field) and not hasattr(v_field, "value"):
        v_field = CallableField(v_field, model.n)
    sup, dsup = measure_field_norms(v_field, model.n)
    if sup > eps_bound + 1e-12 or dsup > max(eps_bound, 10.0 * eps_bound):
        raise NormBoundError(
            f"perturbation norm {sup:.3e} (gradient {dsup:.3e}) exceeds bound {eps_bound:.3e}"
        )
    new_potential = SumField([model.potential, v_field])
    info = model.channel_info
    if info is not None:
        info = replace(info, extra_potential_bound=info.extra_potential_bound + sup)
    return replace(model, potential=new_potential, channel_info=info)


def shift_potential(model: MechanicalLagrangian, constant: float) -> MechanicalLagrangian:
    """Add a constant to the potential (used to renormalise min U to zero)."""
    new_potential = SumField([model.potential, ConstantField(constant, model.n)])
    return replace(model, potential=new_potential)


def check_lemma_constant(model: MechanicalLagrangian, eps: float = 0.0) -> dict:
    """Barrier-strength inequality 2*sqrt(K1*K2)*width(C) > n + 1 + eps.

    K1 is the metric coefficient on a barrier core for the last coordinate,
    K2 the potential floor there; the inequality guarantees that crossing a
    barrier band costs more than any reconnection inside the soft channels.
    """
    info = model.channel_info
    if info is None:
        raise ModelConfigError("lemma check requires a channel model")
    k1 = info.barrier_coefficient
    k2 = max(info.barrier_potential - info.extra_potential_bound - eps, 0.0)
    width = 2.0 * info.half_width
    lhs = 2.0 * np.sqrt(k1 * k2) * width
    rhs = model.n + 1.0 + eps
    return {"lhs": float(lhs), "rhs": float(rhs), "satisfied": bool(lhs > rhs)}


def model_spec_to_json_str(spec: ChannelModelSpec) -> str:
    return json.dumps(spec.to_json(), indent=2, sort_keys=True)
