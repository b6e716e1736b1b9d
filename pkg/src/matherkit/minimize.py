"""Gradient descent with Armijo backtracking on the discrete loop action.

The descent direction is the gradient preconditioned by a constant-coefficient
kinetic operator, inverted per Fourier mode; the preconditioner is symmetric
positive definite, so every step is a descent direction, monotone decrease is
enforced by the line search, and the stopping test uses the true gradient.
The trial step each iteration is a safeguarded Barzilai-Borwein estimate,
which removes the slow gradient tail of fixed-step descent on the stiff loop
landscape.  Set ``precondition=False`` for plain gradient descent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .loops import Loop, action_gradient, discrete_action, loop_energy_drift
from .models import MechanicalLagrangian


class MinimizationError(RuntimeError):
    def __init__(self, message, last_loop=None):
        super().__init__(message)
        self.last_loop = last_loop


@dataclass
class MinimizeReport:
    loop: Loop
    action: float
    average_action: float
    gradient_norm: float
    iterations: int
    converged: bool
    energy_drift: float
    label: str = ""


def _precondition_factors(model, loop: Loop, ridge_scale: float = 1.0):
    mid, _, dt = loop.midpoints_velocities()
    coeff = model.metric_coefficients(mid)  # kappa_k a_k^2 per segment
    gamma = 2.0 * np.mean(coeff, axis=0)  # velocity-Hessian diagonal scale
    freqs = np.arange(loop.segments // 2 + 1)
    lam = 2.0 - 2.0 * np.cos(2.0 * np.pi * freqs / loop.segments)
    ridge = ridge_scale * dt
    return lam[:, None] * (gamma[None, :] / dt) + ridge


def _apply_preconditioner(grad: np.ndarray, factors: np.ndarray) -> np.ndarray:
    spec = np.fft.rfft(grad, axis=0)
    spec /= factors
    return np.fft.irfft(spec, n=grad.shape[0], axis=0)


def minimize_loop(
    initial: Loop,
    model: MechanicalLagrangian,
    c=None,
    tol: float = 1e-8,
    max_iter: int = 5000,
    precondition: bool = True,
    armijo: float = 1e-4,
    label: str = "",
) -> MinimizeReport:
    """Descend the discrete action over loop shapes at fixed homology and period.

    Accepted steps never increase the action; exits when the gradient
    max-norm drops below ``tol`` or after ``max_iter`` iterations.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    loop = initial.copy()
    action = discrete_action(loop, model, c)
    if not np.isfinite(action):
        raise MinimizationError("non-finite action on the initial loop", last_loop=loop)

    factors = _precondition_factors(model, loop) if precondition else None
    step = 1.0
    prev_points = None
    prev_direction = None
    iterations = 0
    converged = False
    grad_norm = np.inf
    window = 60
    window_anchor = action
    for iterations in range(1, max_iter + 1):
        grad = action_gradient(loop, model, c)
        grad_norm = float(np.max(np.abs(grad)))
        if grad_norm <= tol:
            converged = True
            iterations -= 1
            break
        direction = _apply_preconditioner(grad, factors) if precondition else grad
        slope = float(np.sum(grad * direction))
        if slope <= 0.0 or not np.isfinite(slope):
            # fall back to the raw gradient if the preconditioner misbehaves
            direction = grad
            slope = float(np.sum(grad * grad))
        # Barzilai-Borwein trial step from the previous (points, direction) pair
        s = 2.0 * step
        if prev_points is not None:
            dx = loop.points - prev_points
            dg = direction - prev_direction
            denom = float(np.sum(dx * dg))
            if denom > 0.0:
                s = float(np.sum(dx * dx)) / denom
        s = min(max(s, 1e-10), 1e6)
        prev_points = loop.points.copy()
        prev_direction = direction
        accepted = False
        while s > 1e-18:
            trial = loop.points - s * direction
            candidate = Loop(trial, loop.homology, loop.period)
            new_action = discrete_action(candidate, model, c)
            if np.isfinite(new_action) and new_action <= action - armijo * s * slope:
                loop = candidate
                action = new_action
                step = s
                accepted = True
                break
            s *= 0.5
        if not accepted:
            break  # line search stalled: gradient-tol not reachable at this N
        # stop burning iterations on a flat tail: once the action has stopped
        # moving at roundoff scale the minimiser value is converged even if
        # the gradient in nearly-flat directions is not yet below tol
        if iterations % window == 0:
            if window_anchor - action <= 1e-8 * (1.0 + abs(action)):
                break
            window_anchor = action

    if not np.isfinite(action):
        raise MinimizationError("descent diverged to a non-finite action", last_loop=loop)
    return MinimizeReport(
        loop=loop,
        action=action,
        average_action=action / loop.period,
        gradient_norm=grad_norm,
        iterations=iterations,
        converged=converged,
        energy_drift=loop_energy_drift(loop, model),
        label=label,
    )


_INV_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def golden_section_min(f, lo: float, hi: float, rel_tol: float = 1e-4,
                       max_iter: int = 80):
    """Golden-section minimisation in log space on [lo, hi] > 0.

    Returns (argmin, value).  Robust for the unimodal period profiles of the
    average action; endpoints are included as candidates.
    """
    a, b = np.log(lo), np.log(hi)
    x1 = b - _INV_GOLDEN * (b - a)
    x2 = a + _INV_GOLDEN * (b - a)
    f1, f2 = f(np.exp(x1)), f(np.exp(x2))
    fa, fb = f(np.exp(a)), f(np.exp(b))
    best = min((fa, np.exp(a)), (fb, np.exp(b)), (f1, np.exp(x1)), (f2, np.exp(x2)))
    # monotone profiles: the optimum sits on the boundary, no need to refine
    if fb <= f2 <= f1 <= fa:
        return np.exp(b), fb
    if fa <= f1 <= f2 <= fb:
        return np.exp(a), fa
    for _ in range(max_iter):
        if (b - a) <= rel_tol:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_GOLDEN * (b - a)
            f1 = f(np.exp(x1))
            if f1 < best[0]:
                best = (f1, np.exp(x1))
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_GOLDEN * (b - a)
            f2 = f(np.exp(x2))
            if f2 < best[0]:
                best = (f2, np.exp(x2))
    return best[1], best[0]
