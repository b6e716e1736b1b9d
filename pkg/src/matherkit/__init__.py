"""Variational toolkit for Mather alpha/beta functions of torus Lagrangians."""

from .alpha import AlphaSample, AlphaWinner, HomologyBudget, alpha_direct, alpha_direct_sample, fixed_point_value, min_average_action
from .fields import ModelConfigError, TrigPolynomialField
from .loops import Loop, action_gradient, discrete_action, load_loop, save_loop, straight_loop
from .minimize import MinimizationError, MinimizeReport, minimize_loop
from .models import (
    ChannelModelSpec,
    MechanicalLagrangian,
    NormBoundError,
    build_channel_model,
    check_lemma_constant,
    eval_lagrangian,
    eval_modified,
    hamiltonian,
    pairing,
    perturb,
    random_trig_potential,
    shift_potential,
)
from .oracles import (
    DegenerateFlatError,
    GeodesicChannelSpec,
    PendulumSpec,
    SubspaceError,
    alpha_A,
    alpha_A_drift,
    alpha_B,
    alpha_B_drift,
    channel_alpha_oracle,
    channel_alpha_table,
    corner_coordinates,
    pendulum_alpha,
    pendulum_beta,
    pendulum_flat_boundary,
)

__all__ = [name for name in dir() if not name.startswith("_")]
