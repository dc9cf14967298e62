# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Controllers: linear MPC, LPV candidates and randomized dual control."""

from .base import Controller, DualController, LinearMpcController
from .condensed import CondensedProblem, build_condensed_problem, prediction_matrix
from .dual import (
    DEFAULT_CANDIDATES,
    DualControlConfig,
    covariance_gradient,
    dual_control_step,
    lpv_candidate,
)
from .factory import ControllerFactory
from .linear import ControlPlan, clip_inputs, solve_linear_mpc

__all__ = [
    "DEFAULT_CANDIDATES",
    "CondensedProblem",
    "ControlPlan",
    "Controller",
    "ControllerFactory",
    "DualControlConfig",
    "DualController",
    "LinearMpcController",
    "build_condensed_problem",
    "clip_inputs",
    "covariance_gradient",
    "dual_control_step",
    "lpv_candidate",
    "prediction_matrix",
    "solve_linear_mpc",
]
