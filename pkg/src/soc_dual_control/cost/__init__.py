# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Cost functionals and their Monte Carlo moment checks."""

from .functional import (
    CostSpec,
    conditional_stage_cost,
    covariance_cost,
    realized_cost,
    stage_cost_sample,
    surrogate_cost,
    uniformity_matrix,
)
from .identities import (
    MomentCheck,
    random_gaussian_instance,
    stage_cost_moment_check,
    tracking_moment_check,
    uniformity_moment_check,
)

__all__ = [
    "CostSpec",
    "MomentCheck",
    "conditional_stage_cost",
    "covariance_cost",
    "random_gaussian_instance",
    "realized_cost",
    "stage_cost_moment_check",
    "stage_cost_sample",
    "surrogate_cost",
    "tracking_moment_check",
    "uniformity_matrix",
    "uniformity_moment_check",
]
