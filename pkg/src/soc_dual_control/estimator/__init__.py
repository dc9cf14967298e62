# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""State estimation: the running EKF and its prediction-only variant."""

from .ekf import (
    Belief,
    corrected_covariance,
    ekf_measurement_update,
    ekf_time_update,
    kalman_gain,
    symmetrize,
)
from .rollout import SurrogateRollout, as_control_array, prediction_only_rollout

__all__ = [
    "Belief",
    "SurrogateRollout",
    "as_control_array",
    "corrected_covariance",
    "ekf_measurement_update",
    "ekf_time_update",
    "kalman_gain",
    "prediction_only_rollout",
    "symmetrize",
]
