"""Alpha/beta assembly, Fenchel conjugation, flat and corner detection.

Everything in this module consumes the variational evaluator (or an explicit
oracle callable) and produces immutable report objects with JSON and CSV
exports.  Grid evaluations are independent; results are always assembled in
lattice order, so output does not depend on evaluation order.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import ndimage

from .alpha import AlphaSample, AlphaWinner, HomologyBudget, alpha_direct_sample, fixed_point_value
from .fields import TWO_PI
from .models import (
    ChannelModelSpec,
    MechanicalLagrangian,
    build_channel_model,
    perturb,
    random_trig_potential,
    shift_potential,
)
from .oracles import channel_alpha_table, corner_coordinates

MANE_TAU = np.pi / 8.0  # width scale separating admissible perturbation sizes


# ---------------------------------------------------------------------------
# Discrete Legendre-Fenchel transform
# ---------------------------------------------------------------------------

def _lattice_points(axes) -> np.ndarray:
    axes = [np.asarray(ax, dtype=float).ravel() for ax in axes]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def fenchel_conjugate(axes, values, dual_axes, chunk: int = 1024) -> np.ndarray:
    """Exact discrete conjugate: out(d) = max over the lattice of <d,p> - f(p).

    ``axes`` and ``dual_axes`` are sequences of 1-d arrays (a single array is
    treated as a one-axis lattice); ``values`` is shaped like the primal
    lattice.  The output is shaped like the dual lattice.
    """
    if isinstance(axes, np.ndarray) and axes.ndim == 1:
        axes = (axes,)
    if isinstance(dual_axes, np.ndarray) and dual_axes.ndim == 1:
        dual_axes = (dual_axes,)
    axes = tuple(np.asarray(ax, dtype=float).ravel() for ax in axes)
    dual_axes = tuple(np.asarray(ax, dtype=float).ravel() for ax in dual_axes)
    if any(len(ax) == 0 for ax in axes) or any(len(ax) == 0 for ax in dual_axes):
        raise ValueError("empty lattice in Fenchel conjugation")
    primal = _lattice_points(axes)
    f = np.asarray(values, dtype=float).ravel()
    if len(f) != len(primal):
        raise ValueError("values do not match the primal lattice")
    finite = np.isfinite(f)
    if not np.any(finite):
        raise ValueError("no finite samples to conjugate")
    primal, f = primal[finite], f[finite]
    dual = _lattice_points(dual_axes)
    out = np.empty(len(dual))
    for start in range(0, len(dual), chunk):
        block = dual[start:start + chunk]
        out[start:start + chunk] = np.max(block @ primal.T - f, axis=1)
    return out.reshape(tuple(len(ax) for ax in dual_axes))


# ---------------------------------------------------------------------------
# Alpha fields over cohomology lattices
# ---------------------------------------------------------------------------

@dataclass
class AlphaField:
    axes: tuple[np.ndarray, ...]
    values: np.ndarray
    samples: np.ndarray  # object array of AlphaSample (or None for holes)
    holes: tuple[tuple[int, ...], ...]
    meta: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.values.shape

    @property
    def dim(self):
        return len(self.axes)

    def point(self, idx) -> np.ndarray:
        return np.array([self.axes[k][i] for k, i in enumerate(idx)])

    def points(self) -> np.ndarray:
        return _lattice_points(self.axes)

    def min_location(self):
        idx = np.unravel_index(np.nanargmin(self.values), self.shape)
        return idx, self.point(idx)

    def convexity_defect(self) -> float:
        """Largest violation of midpoint convexity over aligned lattice triples."""
        worst = 0.0
        v = self.values
        for ax in range(v.ndim):
            if v.shape[ax] < 3:
                continue
            mid = np.take(v, range(1, v.shape[ax] - 1), axis=ax)
            lo = np.take(v, range(0, v.shape[ax] - 2), axis=ax)
            hi = np.take(v, range(2, v.shape[ax]), axis=ax)
            defect = mid - 0.5 * (lo + hi)
            if defect.size:
                worst = max(worst, float(np.nanmax(defect)))
        return worst

    def to_csv(self, path) -> None:
        n = len(self.axes)
        header = [f"c_{k + 1}" for k in range(n)] + ["alpha", "winner_h", "winner_T", "channel"]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for idx in itertools.product(*[range(len(ax)) for ax in self.axes]):
                sample = self.samples[idx]
                point = self.point(idx)
                if sample is None:
                    writer.writerow([repr(float(x)) for x in point] + ["nan", "", "", "hole"])
                    continue
                w = sample.winner
                writer.writerow(
                    [repr(float(x)) for x in point]
                    + [repr(float(sample.value)),
                       ";".join(str(int(v)) for v in w.h),
                       repr(float(w.period)) if math.isfinite(w.period) else "inf",
                       w.channel]
                )

    def summary(self) -> dict:
        finite = self.values[np.isfinite(self.values)]
        return {
            "shape": list(self.shape),
            "min": float(np.min(finite)) if finite.size else None,
            "max": float(np.max(finite)) if finite.size else None,
            "holes": len(self.holes),
            "points": int(self.values.size),
            "convexity_defect": self.convexity_defect(),
        }


def _alpha_worker(args):
    model, point, budget = args
    return alpha_direct_sample(model, point, budget)


def build_alpha_field(model: MechanicalLagrangian, region, resolution,
                      budget: Optional[HomologyBudget] = None,
                      jobs: int = 1) -> AlphaField:
    """Sample alpha over an axis-aligned lattice in cohomology space.

    ``region`` is one (lo, hi) pair per coordinate; a pair with lo == hi
    freezes that axis.  ``resolution`` applies to every free axis (or one
    value per axis).  Per-point failures become holes, not fatal errors.
    """
    budget = budget or HomologyBudget()
    region = [tuple(map(float, pair)) for pair in region]
    if len(region) != model.n:
        raise ValueError(f"region needs {model.n} axis ranges")
    if np.isscalar(resolution):
        resolution = [int(resolution)] * model.n
    axes = []
    for (lo, hi), res in zip(region, resolution):
        if hi < lo:
            raise ValueError("region bounds must satisfy lo <= hi")
        if hi == lo:
            axes.append(np.array([lo]))
        else:
            if res < 8:
                raise ValueError("resolution must be at least 8 per free axis")
            axes.append(np.linspace(lo, hi, res))
    axes = tuple(axes)
    shape = tuple(len(ax) for ax in axes)
    points = _lattice_points(axes)

    values = np.full(shape, np.nan)
    samples = np.empty(shape, dtype=object)
    holes = []
    indices = list(itertools.product(*[range(s) for s in shape]))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_alpha_worker,
                                    [(model, p, budget) for p in points],
                                    chunksize=4))
    else:
        results = []
        for p in points:
            try:
                results.append(alpha_direct_sample(model, p, budget))
            except Exception as exc:  # noqa: BLE001 - recorded as a hole
                results.append(exc)
    for idx, res in zip(indices, results):
        if isinstance(res, Exception):
            holes.append(idx)
            samples[idx] = None
        else:
            values[idx] = res.value
            samples[idx] = res
    return AlphaField(axes, values, samples, tuple(holes),
                      meta={"budget_hmax": budget.hmax, "N": budget.N})


@dataclass
class BetaGrid:
    rotations: np.ndarray  # (m, n)
    betas: np.ndarray  # (m,)
    homologies: np.ndarray  # (m, n) int
    periods: np.ndarray  # (m,)

    def to_csv(self, path) -> None:
        n = self.rotations.shape[1]
        header = [f"rho_{k + 1}" for k in range(n)] + ["beta", "h", "T"]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for rho, beta, h, T in zip(self.rotations, self.betas,
                                       self.homologies, self.periods):
                writer.writerow([repr(float(r)) for r in rho]
                                + [repr(float(beta)),
                                   ";".join(str(int(v)) for v in h),
                                   repr(float(T)) if math.isfinite(T) else "inf"])


def build_beta_grid(model: MechanicalLagrangian,
                    budget: Optional[HomologyBudget] = None) -> BetaGrid:
    """Minimal average action at c = 0 on the budget's rational rotation lattice."""
    from .alpha import _min_average_report

    budget = budget or HomologyBudget()
    rows = []
    fp_min, _ = fixed_point_value(model)
    rows.append((np.zeros(model.n), fp_min, np.zeros(model.n, dtype=int), math.inf))
    zero = np.zeros(model.n)
    for h in budget.enumerate_classes(model.n):
        for T in budget.T_grid:
            try:
                rep = _min_average_report(model, zero, h, T, budget.restarts,
                                          N=budget.N, tol=budget.tol,
                                          max_iter=budget.max_iter, seed=budget.seed)
            except Exception:  # noqa: BLE001 - skip failed entries
                continue
            rows.append((TWO_PI * h / T, rep.average_action, h, T))
    rotations = np.array([r[0] for r in rows])
    betas = np.array([r[1] for r in rows])
    hs = np.array([r[2] for r in rows], dtype=int)
    periods = np.array([r[3] for r in rows])
    return BetaGrid(rotations, betas, hs, periods)


# ---------------------------------------------------------------------------
# Flat detection
# ---------------------------------------------------------------------------

@dataclass
class FlatReport:
    level: float
    tol: float
    member_mask: np.ndarray
    member_count: int
    bounding_box: tuple[tuple[float, float], ...]
    dimension: int
    singular_values: tuple[float, ...]

    def to_json(self) -> dict:
        return {
            "schema": "flat-report/1",
            "level": self.level,
            "tol": self.tol,
            "member_count": self.member_count,
            "bounding_box": [list(b) for b in self.bounding_box],
            "dimension": self.dimension,
            "singular_values": list(self.singular_values),
        }


def flat_detect(fld: AlphaField, level: Optional[float] = None,
                tol_flat: float = 1e-3, sv_threshold: float = 1e-2) -> FlatReport:
    """Connected flat component at a level, with an affine dimension estimate.

    The dimension counts singular values of the centred member-point matrix
    that reach ``sv_threshold`` relative to the largest one.
    """
    values = fld.values
    if level is None:
        level = float(np.nanmin(values))
    with np.errstate(invalid="ignore"):
        mask = np.abs(values - level) <= tol_flat
    mask &= np.isfinite(values)
    if not np.any(mask):
        raise ValueError("empty flat membership at the requested level")
    labels, _ = ndimage.label(mask)
    anchor = np.unravel_index(np.nanargmin(np.where(mask, values, np.inf)), values.shape)
    component = labels == labels[anchor]
    idx = np.argwhere(component)
    pts = np.array([[fld.axes[k][i] for k, i in enumerate(row)] for row in idx])
    box = tuple((float(col.min()), float(col.max())) for col in pts.T)
    centered = pts - pts.mean(axis=0)
    if len(pts) < 2:
        svals, dim = (), 0
    else:
        s = np.linalg.svd(centered, compute_uv=False)
        smax = s.max()
        dim = int(np.sum(s >= sv_threshold * smax)) if smax > 0.0 else 0
        svals = tuple(float(v) for v in s)
    return FlatReport(float(level), float(tol_flat), component, int(component.sum()),
                      box, dim, svals)


def zero_level_crossings(xs, vals, tol: float) -> list[float]:
    """Interpolated locations where a sampled curve crosses the level ``tol``."""
    xs = np.asarray(xs, dtype=float)
    vals = np.asarray(vals, dtype=float) - tol
    out = []
    for i in range(len(xs) - 1):
        a, b = vals[i], vals[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if (a <= 0.0 < b) or (b <= 0.0 < a):
            t = a / (a - b)
            out.append(float(xs[i] + t * (xs[i + 1] - xs[i])))
    return out


# ---------------------------------------------------------------------------
# One-sided derivatives and corner detection
# ---------------------------------------------------------------------------

@dataclass
class DerivativeEstimate:
    value: float
    error: float
    steps: tuple[float, ...]
    raw: tuple[float, ...]
    winners: tuple = ()


def _eval_with_winner(fn, c):
    out = fn(np.asarray(c, dtype=float))
    if isinstance(out, AlphaSample):
        return out.value, out.winner
    if isinstance(out, tuple):
        return float(out[0]), out[1]
    return float(out), None


def directional_derivative(fn, c, e, side: str = "+", t0: float = 1e-2,
                           levels: int = 3) -> DerivativeEstimate:
    """One-sided directional derivative by Richardson extrapolation.

    ``fn`` maps a class to a value (or an AlphaSample, whose winner metadata
    is collected).  ``side='+'`` estimates the derivative along +e just ahead
    of c; ``side='-'`` the derivative just behind it.  The error bar is the
    magnitude of the last extrapolation correction.
    """
    c = np.asarray(c, dtype=float)
    e = np.asarray(e, dtype=float)
    norm = np.linalg.norm(e)
    if not np.isclose(norm, 1.0, atol=1e-9):
        raise ValueError("direction must be a unit vector")
    sign = 1.0 if side == "+" else -1.0
    f0, w0 = _eval_with_winner(fn, c)
    steps, raw, winners = [], [], []
    if w0 is not None:
        winners.append(w0)
    for k in range(levels):
        t = t0 / 2.0**k
        fk, wk = _eval_with_winner(fn, c + sign * t * e)
        steps.append(t)
        raw.append(sign * (fk - f0) / t)
        if wk is not None:
            winners.append(wk)
    table = [list(raw)]
    for order in range(1, levels):
        prev = table[-1]
        fac = 2.0**order
        table.append([(fac * prev[j + 1] - prev[j]) / (fac - 1.0)
                      for j in range(len(prev) - 1)])
    estimate = table[-1][-1]
    error = abs(table[-1][-1] - table[-2][-1]) if levels > 1 else abs(raw[-1])
    return DerivativeEstimate(float(estimate), float(error),
                              tuple(steps), tuple(raw), tuple(winners))


@dataclass
class CornerDirection:
    direction: tuple[float, ...]
    dplus: float
    dminus: float
    gap: float
    dplus_error: float
    dminus_error: float


@dataclass
class CornerReport:
    location: tuple[float, ...]
    value: float
    directions: tuple[CornerDirection, ...]
    winner_rotations: tuple[tuple[float, ...], ...]
    winner_channels: tuple[str, ...]
    max_gap: float
    is_corner: bool
    persists: Optional[bool] = None
    displacement: Optional[float] = None

    def to_json(self) -> dict:
        doc = {
            "schema": "corner-report/1",
            "location": list(self.location),
            "value": self.value,
            "directions": [
                {
                    "e": list(d.direction),
                    "dplus": d.dplus,
                    "dminus": d.dminus,
                    "gap": d.gap,
                    "dplus_error": d.dplus_error,
                    "dminus_error": d.dminus_error,
                }
                for d in self.directions
            ],
            "winner_rotations": [list(r) for r in self.winner_rotations],
            "winner_channels": list(self.winner_channels),
            "max_gap": self.max_gap,
            "is_corner": self.is_corner,
        }
        if self.persists is not None:
            doc["persists"] = self.persists
            doc["displacement"] = self.displacement
        return doc


def _distinct_rotations(winners) -> tuple[list[tuple[float, ...]], list[str]]:
    seen = {}
    for w in winners:
        if w is None:
            continue
        key = tuple(round(float(r), 6) for r in w.rotation)
        seen.setdefault(key, w.channel)
    rots = sorted(seen)
    return [tuple(r) for r in rots], [seen[r] for r in rots]


def corner_scan(model: MechanicalLagrangian, candidates=None, directions=None,
                budget: Optional[HomologyBudget] = None, tol_corner: float = 1e-3,
                t0: float = 1e-2, alpha_fn: Optional[Callable] = None,
                include_origin: bool = True) -> list[CornerReport]:
    """Probe candidate classes for non-differentiability of alpha.

    A candidate is flagged as a corner when some direction has a one-sided
    derivative gap above ``tol_corner`` and at least two distinct winner
    rotation vectors appear among the probes.
    """
    n = model.n
    info = model.channel_info
    if candidates is None:
        spec = info.spec if info is not None else None
        delta = spec.delta if spec is not None else 0.5
        candidates = corner_coordinates(n, np.asarray(delta))
        if include_origin:
            candidates = list(candidates) + [np.zeros(n)]
    if directions is None:
        directions = [np.eye(n)[k] for k in range(max(n - 1, 1))]
    if alpha_fn is None:
        budget = budget or HomologyBudget()

        def alpha_fn(point):  # noqa: ANN001 - local closure
            return alpha_direct_sample(model, point, budget)

    reports = []
    for cand in candidates:
        cand = np.asarray(cand, dtype=float)
        value, w0 = _eval_with_winner(alpha_fn, cand)
        winners = [w0] if w0 is not None else []
        dirs = []
        for e in directions:
            plus = directional_derivative(alpha_fn, cand, e, "+", t0)
            minus = directional_derivative(alpha_fn, cand, e, "-", t0)
            gap = plus.value - minus.value
            dirs.append(CornerDirection(tuple(np.asarray(e, dtype=float)),
                                        plus.value, minus.value, float(gap),
                                        plus.error, minus.error))
            # the smallest-step probe on each side is the closest stand-in for
            # the one-sided minimising measures at the candidate itself
            for est in (plus, minus):
                if est.winners:
                    winners.append(est.winners[-1])
        rots, chans = _distinct_rotations(winners)
        max_gap = max((d.gap for d in dirs), default=0.0)
        is_corner = bool(max_gap > tol_corner and len(rots) >= 2)
        reports.append(CornerReport(tuple(cand), float(value), tuple(dirs),
                                    tuple(rots), tuple(chans), float(max_gap),
                                    is_corner))
    return reports


# ---------------------------------------------------------------------------
# Max-formula verification
# ---------------------------------------------------------------------------

@dataclass
class LemmaReport:
    points: np.ndarray
    direct: np.ndarray
    restricted: np.ndarray
    max_error: float
    winner_channels: tuple[str, ...]
    budget_boundary_hits: int
    restricted_source: str

    def to_json(self) -> dict:
        return {
            "schema": "lemma-report/1",
            "points": self.points.tolist(),
            "direct": self.direct.tolist(),
            "restricted": self.restricted.tolist(),
            "max_error": self.max_error,
            "winner_channels": list(self.winner_channels),
            "budget_boundary_hits": self.budget_boundary_hits,
            "restricted_source": self.restricted_source,
        }


def verify_max_formula(model: MechanicalLagrangian, points,
                       budget: Optional[HomologyBudget] = None,
                       use_oracle: Optional[bool] = None) -> LemmaReport:
    """Compare free alpha against the max of channel-restricted values.

    For unperturbed channel models the restricted values come from the
    closed-form oracles; for perturbed models they come from channel-seeded
    minimisation.
    """
    budget = budget or HomologyBudget()
    info = model.channel_info
    if info is None:
        raise ValueError("max-formula verification requires a channel model")
    if use_oracle is None:
        use_oracle = info.extra_potential_bound == 0.0
    points = np.atleast_2d(np.asarray(points, dtype=float))
    direct, restricted, channels = [], [], []
    boundary_hits = 0
    for c in points:
        sample = alpha_direct_sample(model, c, budget)
        direct.append(sample.value)
        channels.append(sample.winner.channel)
        boundary_hits += int(sample.budget_boundary)
        if use_oracle:
            table = channel_alpha_table(info.spec, c)
            restricted.append(max(max(table.values()), 0.0))
        else:
            vals = []
            for ch in info.seed_channels():
                sub = alpha_direct_sample(model, c, budget, channels=(ch.label,))
                vals.append(sub.value)
            restricted.append(max(vals))
    direct = np.asarray(direct)
    restricted = np.asarray(restricted)
    return LemmaReport(points, direct, restricted,
                       float(np.max(np.abs(direct - restricted))),
                       tuple(channels), boundary_hits,
                       "oracle" if use_oracle else "channel-seeded")


# ---------------------------------------------------------------------------
# Mane stability sweep
# ---------------------------------------------------------------------------

@dataclass
class StabilityReport:
    eps: float
    trials: int
    seed: int
    baseline: list
    trial_results: list
    all_persist: bool
    max_displacement: float
    identical_to_baseline: Optional[bool]

    def to_json(self) -> dict:
        return {
            "schema": "stability-report/1",
            "eps": self.eps,
            "trials": self.trials,
            "seed": self.seed,
            "baseline": [r.to_json() for r in self.baseline],
            "trials_detail": [
                {"trial": i, "corners": [r.to_json() for r in rs]}
                for i, rs in enumerate(self.trial_results)
            ],
            "all_persist": self.all_persist,
            "max_displacement": self.max_displacement,
            "identical_to_baseline": self.identical_to_baseline,
        }


def _locate_flat_exit(alpha_fn, anchor, direction, radius, level, tol):
    """Bisect for the point along +direction where alpha leaves the flat level."""
    lo, hi = 0.0, float(radius)
    f_hi, _ = _eval_with_winner(alpha_fn, anchor + hi * direction)
    if f_hi <= level + tol:
        return None  # no exit inside the search radius
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        f_mid, _ = _eval_with_winner(alpha_fn, anchor + mid * direction)
        if f_mid <= level + tol:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-6 * max(radius, 1.0):
            break
    return 0.5 * (lo + hi)


def _scan_one_corner(model, corner, direction, budget, tol_corner, t0, radius):
    def alpha_fn(point):
        return alpha_direct_sample(model, point, budget)

    level, _ = _eval_with_winner(alpha_fn, corner - radius * direction)
    offset = _locate_flat_exit(alpha_fn, corner - radius * direction, direction,
                               2.0 * radius, level, tol_corner)
    if offset is None:
        report = corner_scan(model, [corner], [direction], budget,
                             tol_corner=tol_corner, t0=t0)[0]
        report.persists = False
        report.displacement = None
        return report
    location = corner - radius * direction + offset * direction
    report = corner_scan(model, [location], [direction], budget,
                         tol_corner=tol_corner, t0=t0)[0]
    displacement = float(np.linalg.norm(location - corner))
    report.displacement = displacement
    report.persists = bool(report.is_corner and displacement <= radius)
    return report


def mane_stability_sweep(spec: ChannelModelSpec, eps: float, trials: int,
                         seed: int, budget: Optional[HomologyBudget] = None,
                         tol_corner: float = 1e-3, t0: float = 1e-2,
                         radius: Optional[float] = None,
                         max_harmonic: int = 3) -> StabilityReport:
    """Random potential perturbations and corner persistence.

    Each trial draws a trigonometric polynomial with both coefficient-sum
    norms (value and gradient) at most eps, renormalises the potential so its
    minimum is zero, relocates the flat exit near each unperturbed corner and
    re-runs the corner probe there.
    """
    spec = spec.resolved()
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if eps < 0.0:
        raise ValueError("eps must be non-negative")
    min_delta = min(spec.delta)
    if eps > min_delta / 10.0 + 1e-15:
        raise ValueError(f"eps must satisfy eps <= delta/10 = {min_delta / 10.0:g}")
    if eps >= MANE_TAU**2:
        raise ValueError(f"eps must be below tau^2 = {MANE_TAU**2:g}")
    budget = budget or HomologyBudget()
    base = build_channel_model(spec)
    corners = corner_coordinates(spec.n, np.asarray(spec.delta))
    directions = [c[: spec.n] / np.linalg.norm(c) for c in corners]
    radius = radius if radius is not None else max(10.0 * eps, 1e-3)

    baseline = [
        _scan_one_corner(base, np.asarray(c), d, budget, tol_corner, t0, radius)
        for c, d in zip(corners, directions)
    ]

    trial_results = []
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        v = random_trig_potential(spec.n, 1.0, rng, max_harmonic=max_harmonic)
        scale = min(1.0, eps / max(v.coefficient_norm(), 1e-300),
                    eps / max(v.gradient_norm_bound(), 1e-300))
        if eps == 0.0:
            scale = 0.0
        v.cos_coeffs = v.cos_coeffs * scale
        v.sin_coeffs = v.sin_coeffs * scale
        model = perturb(base, v, eps_bound=max(eps, 1e-300))
        fp_min, _ = fixed_point_value(model)
        model = shift_potential(model, -fp_min)
        results = [
            _scan_one_corner(model, np.asarray(c), d, budget, tol_corner, t0, radius)
            for c, d in zip(corners, directions)
        ]
        trial_results.append(results)

    all_persist = all(r.persists for rs in trial_results for r in rs)
    displacements = [r.displacement for rs in trial_results for r in rs
                     if r.displacement is not None]
    max_disp = float(max(displacements)) if displacements else math.nan
    identical = None
    if eps == 0.0:
        identical = all(
            r.to_json() == b.to_json()
            for rs in trial_results for r, b in zip(rs, baseline)
        )
    return StabilityReport(float(eps), int(trials), int(seed), baseline,
                           trial_results, bool(all_persist), max_disp, identical)
