# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Battery plant model: OCV curves, Coulomb counting and truth simulation."""

from .defaults import (
    default_curves,
    flat_curve,
    flat_then_steep_curve,
    identity_curve,
    mid_plateau_curve,
    near_linear_curve,
    reference_system_model,
    steep_ends_curve,
    uniform_model,
)
from .ocv import OcvCurve, ocv_eval, ocv_slope
from .plant import (
    BatteryParams,
    SystemModel,
    TrueState,
    observe,
    sample_diagonal_noise,
    step_truth,
)

__all__ = [
    "BatteryParams",
    "OcvCurve",
    "SystemModel",
    "TrueState",
    "default_curves",
    "flat_curve",
    "flat_then_steep_curve",
    "identity_curve",
    "mid_plateau_curve",
    "near_linear_curve",
    "observe",
    "ocv_eval",
    "ocv_slope",
    "reference_system_model",
    "sample_diagonal_noise",
    "steep_ends_curve",
    "uniform_model",
]
