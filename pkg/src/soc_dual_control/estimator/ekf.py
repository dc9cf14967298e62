# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Extended Kalman filter over the battery SOC vector."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from ..errors import ContractError, NumericalError
from ..model.plant import SystemModel

logger = logging.getLogger(__name__)

# Largest eigenvalue deficit accepted before a covariance is declared indefinite
PSD_TOLERANCE = 1e-9


def symmetrize(matrix: np.ndarray) -> np.ndarray:
    """Return (M + M^T) / 2."""
    return 0.5 * (matrix + matrix.T)


@dataclass(frozen=True, eq=False)
class Belief:
    """Information state: conditional mean and covariance of the SOC vector.

    The covariance is symmetrized on construction. The same type holds the
    filtered pair and the one-step prediction.

    Attributes:
        mean: SOC estimate (n,), not clamped
        cov: Error covariance (n, n), symmetric PSD
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        mean = np.array(self.mean, dtype=float)
        cov = np.array(self.cov, dtype=float)

        if mean.ndim != 1 or mean.size == 0:
            raise ContractError(f"Belief mean must be a non-empty vector, got {mean.shape}")
        n = mean.size
        if cov.shape != (n, n):
            raise ContractError(f"Belief cov must have shape ({n}, {n}), got {cov.shape}")
        if not np.all(np.isfinite(mean)) or not np.all(np.isfinite(cov)):
            raise ContractError("Belief contains non-finite values")

        cov = symmetrize(cov)
        scale = max(1.0, float(np.max(np.abs(cov))))
        min_eig = float(np.min(np.linalg.eigvalsh(cov)))
        if min_eig < -PSD_TOLERANCE * scale:
            raise ContractError(
                f"Belief cov is not positive semidefinite (min eigenvalue {min_eig:.3e})"
            )

        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n(self) -> int:
        """State dimension."""
        return self.mean.size

    @property
    def cov_trace(self) -> float:
        """trace(cov), the scalar uncertainty metric."""
        return float(np.trace(self.cov))


def kalman_gain(
    cov: np.ndarray, slopes: np.ndarray, sigma_v: np.ndarray
) -> np.ndarray:
    """Gain Omega = cov H^T (H cov H^T + sigma_v)^-1 with H = diag(slopes).

    The innovation covariance is factored with Cholesky; no explicit inverse is
    formed.

    Raises:
        NumericalError: If the innovation covariance is not positive definite
    """
    h_cov = slopes[:, None] * cov
    if not np.any(h_cov):
        # Nothing observable is uncertain: no correction, even with sigma_v = 0
        return np.zeros_like(cov)
    innovation_cov = symmetrize(h_cov * slopes[None, :] + sigma_v)
    try:
        factor = cho_factor(innovation_cov)
    except LinAlgError as e:
        raise NumericalError(f"Innovation covariance is singular: {e}") from e
    # S symmetric: Omega^T = S^-1 H cov
    return cho_solve(factor, h_cov).T


def corrected_covariance(
    cov: np.ndarray, slopes: np.ndarray, sigma_v: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Measurement-corrected covariance (I - Omega H) cov, symmetrized.

    Returns:
        Tuple of (corrected covariance, gain Omega)
    """
    gain = kalman_gain(cov, slopes, sigma_v)
    n = cov.shape[0]
    corrected = (np.eye(n) - gain * slopes[None, :]) @ cov
    return symmetrize(corrected), gain


def ekf_time_update(model: SystemModel, belief: Belief, current: Any) -> Belief:
    """Predict one step ahead: mean + diag(g) I, cov + sigma_w.

    The Jacobian of the Coulomb-counting dynamics is the identity and the
    predicted mean is deliberately left unclamped.

    Raises:
        ContractError: If the input violates its bounds or dimensions disagree
    """
    current = model.check_input(current)
    _check_dimension(model, belief)
    return Belief(
        mean=belief.mean + model.gains * current,
        cov=belief.cov + model.sigma_w,
    )


def ekf_measurement_update(
    model: SystemModel, predicted: Belief, measurement: Any
) -> Belief:
    """Correct a predicted belief with a voltage measurement.

    H and h are evaluated at the predicted mean clamped to [0, 1].

    Args:
        model: System model supplying the OCV curves and sigma_v
        predicted: Output of :func:`ekf_time_update`
        measurement: Measured voltages (n,)

    Returns:
        Filtered belief

    Raises:
        NumericalError: If the innovation covariance cannot be factored
    """
    _check_dimension(model, predicted)
    measurement = np.asarray(measurement, dtype=float)
    if measurement.shape != (model.n,):
        raise ContractError(
            f"Measurement must have shape ({model.n},), got {measurement.shape}"
        )

    slopes = model.ocv_slopes(predicted.mean)
    cov, gain = corrected_covariance(predicted.cov, slopes, model.sigma_v)
    innovation = measurement - model.ocv_values(predicted.mean)
    return Belief(mean=predicted.mean + gain @ innovation, cov=cov)


def _check_dimension(model: SystemModel, belief: Belief) -> None:
    if belief.n != model.n:
        raise ContractError(
            f"Belief dimension {belief.n} does not match model dimension {model.n}"
        )
