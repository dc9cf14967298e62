# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Prediction-only EKF: anticipated covariance along a planned input sequence."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..errors import ContractError
from ..model.plant import SystemModel
from .ekf import Belief, corrected_covariance

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SurrogateRollout:
    """Open-loop means and anticipated filtered covariances over a horizon.

    Attributes:
        means: (N+1, n) array, means[0] is the initial belief mean
        covs: (N+1, n, n) array of anticipated filtered covariances
    """

    means: np.ndarray
    covs: np.ndarray

    def __post_init__(self) -> None:
        means = np.asarray(self.means, dtype=float)
        covs = np.asarray(self.covs, dtype=float)
        if means.ndim != 2 or covs.ndim != 3:
            raise ContractError(
                f"Rollout needs (N+1, n) means and (N+1, n, n) covs, "
                f"got {means.shape} and {covs.shape}"
            )
        length, n = means.shape
        if covs.shape != (length, n, n):
            raise ContractError(
                f"Rollout covs must have shape ({length}, {n}, {n}), got {covs.shape}"
            )
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covs", covs)

    def __len__(self) -> int:
        return self.means.shape[0]

    @property
    def horizon(self) -> int:
        """N, the number of transitions covered."""
        return len(self) - 1

    @property
    def cov_traces(self) -> np.ndarray:
        """trace(Sigma_k) for every step of the rollout."""
        return np.trace(self.covs, axis1=1, axis2=2)

    @property
    def terminal_trace(self) -> float:
        """trace of the last anticipated covariance."""
        return float(self.cov_traces[-1])


def as_control_array(controls: Any, n: int) -> np.ndarray:
    """Stack a control sequence into an (N+1, n) float array.

    Raises:
        ContractError: If the sequence is empty or has the wrong width
    """
    array = np.asarray(controls, dtype=float)
    if array.ndim != 2 or array.shape[0] == 0 or array.shape[1] != n:
        raise ContractError(f"Controls must have shape (N+1, {n}), got {array.shape}")
    return array


def prediction_only_rollout(
    model: SystemModel, init: Belief, controls: Any
) -> SurrogateRollout:
    """Run the prediction-only EKF along ``controls``.

    Means follow the Coulomb-counting dynamics without measurement correction.
    Covariances are propagated and then contracted with the gain the filter
    would use at the anticipated mean (clamped to [0, 1] for slope evaluation).
    The last control only fixes the horizon length.

    Args:
        model: System model
        init: Belief at the start of the horizon
        controls: (N+1, n) input sequence

    Returns:
        SurrogateRollout with N+1 means and covariances

    Raises:
        ContractError: If a control violates its bounds
        NumericalError: If an innovation covariance cannot be factored
    """
    if init.n != model.n:
        raise ContractError(
            f"Belief dimension {init.n} does not match model dimension {model.n}"
        )
    controls = as_control_array(controls, model.n)
    for current in controls:
        model.check_input(current)

    length = controls.shape[0]
    means = np.empty((length, model.n))
    covs = np.empty((length, model.n, model.n))
    means[0] = init.mean
    covs[0] = init.cov

    for k in range(length - 1):
        means[k + 1] = means[k] + model.gains * controls[k]
        predicted = covs[k] + model.sigma_w
        slopes = model.ocv_slopes(means[k + 1])
        covs[k + 1], _ = corrected_covariance(predicted, slopes, model.sigma_v)

    return SurrogateRollout(means=means, covs=covs)
