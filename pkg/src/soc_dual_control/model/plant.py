# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Multi-battery plant: Coulomb-counting dynamics and OCV measurements."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import ContractError
from .ocv import OcvCurve

logger = logging.getLogger(__name__)

# Slack allowed on applied currents before the controller is blamed
INPUT_BOUND_TOLERANCE = 1e-9


@dataclass(frozen=True)
class BatteryParams:
    """Parameters of a single battery.

    Attributes:
        eta: Coulombic efficiency in (0, 1]
        q_nom: Nominal capacity in ampere-hours
        i_min: Minimum allowed current in amperes
        i_max: Maximum allowed current in amperes
        ocv: OCV-SOC observation curve
    """

    eta: float
    q_nom: float
    i_min: float
    i_max: float
    ocv: OcvCurve

    def __post_init__(self) -> None:
        if not 0.0 < self.eta <= 1.0:
            raise ContractError(f"eta must lie in (0, 1], got {self.eta}")
        if not self.q_nom > 0.0:
            raise ContractError(f"q_nom must be positive, got {self.q_nom}")
        if not self.i_min < self.i_max:
            raise ContractError(
                f"i_min must be below i_max, got [{self.i_min}, {self.i_max}]"
            )

    def gain(self, dt: float) -> float:
        """Coulomb-counting gain eta * dt / q_nom (SOC per ampere per step)."""
        return self.eta * dt / self.q_nom


@dataclass(frozen=True, eq=False)
class SystemModel:
    """n-battery plant with additive Gaussian process and measurement noise.

    Attributes:
        batteries: Per-battery parameters
        dt: Sampling time
        sigma_w: Diagonal process-noise covariance (n x n, SOC^2)
        sigma_v: Diagonal measurement-noise covariance (n x n, volts^2)
    """

    batteries: tuple[BatteryParams, ...]
    dt: float
    sigma_w: np.ndarray
    sigma_v: np.ndarray
    gains: np.ndarray = field(init=False, repr=False)
    i_min: np.ndarray = field(init=False, repr=False)
    i_max: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        batteries = tuple(self.batteries)
        if len(batteries) == 0:
            raise ContractError("System model needs at least one battery")
        if not self.dt > 0.0:
            raise ContractError(f"dt must be positive, got {self.dt}")

        n = len(batteries)
        sigma_w = _diagonal_covariance("sigma_w", self.sigma_w, n)
        sigma_v = _diagonal_covariance("sigma_v", self.sigma_v, n)

        gains = np.array([b.gain(self.dt) for b in batteries])
        if not np.all(np.isfinite(gains)) or np.any(gains <= 0.0):
            raise ContractError(f"Coulomb-counting gains must be positive, got {gains}")

        object.__setattr__(self, "batteries", batteries)
        object.__setattr__(self, "sigma_w", sigma_w)
        object.__setattr__(self, "sigma_v", sigma_v)
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "i_min", np.array([b.i_min for b in batteries]))
        object.__setattr__(self, "i_max", np.array([b.i_max for b in batteries]))

    @property
    def n(self) -> int:
        """Number of batteries."""
        return len(self.batteries)

    @property
    def input_matrix(self) -> np.ndarray:
        """diag(g): maps currents to SOC increments."""
        return np.diag(self.gains)

    def ocv_values(self, soc: np.ndarray) -> np.ndarray:
        """Stacked h(x), evaluated at SOC clamped to [0, 1]."""
        clamped = np.clip(soc, 0.0, 1.0)
        return np.array(
            [b.ocv.value(s) for b, s in zip(self.batteries, clamped, strict=True)]
        )

    def ocv_slopes(self, soc: np.ndarray) -> np.ndarray:
        """Diagonal of the observation Jacobian H, at SOC clamped to [0, 1]."""
        clamped = np.clip(soc, 0.0, 1.0)
        return np.array(
            [b.ocv.slope(s) for b, s in zip(self.batteries, clamped, strict=True)]
        )

    def check_input(self, current: Any, tol: float = INPUT_BOUND_TOLERANCE) -> np.ndarray:
        """Validate a current vector against the per-battery bounds.

        Raises:
            ContractError: If the shape is wrong or a current is out of bounds
        """
        current = np.asarray(current, dtype=float)
        if current.shape != (self.n,):
            raise ContractError(
                f"Input must have shape ({self.n},), got {current.shape}"
            )
        if np.any(current < self.i_min - tol) or np.any(current > self.i_max + tol):
            raise ContractError(
                f"Input {current} outside bounds [{self.i_min}, {self.i_max}]"
            )
        return current

    def with_noise(
        self, sigma_w: np.ndarray | None = None, sigma_v: np.ndarray | None = None
    ) -> SystemModel:
        """Copy of this model with replaced noise covariances."""
        return SystemModel(
            batteries=self.batteries,
            dt=self.dt,
            sigma_w=self.sigma_w if sigma_w is None else sigma_w,
            sigma_v=self.sigma_v if sigma_v is None else sigma_v,
        )


def _diagonal_covariance(name: str, matrix: Any, n: int) -> np.ndarray:
    matrix = np.array(matrix, dtype=float)
    if matrix.shape != (n, n):
        raise ContractError(f"{name} must have shape ({n}, {n}), got {matrix.shape}")
    if np.any(matrix != np.diag(np.diag(matrix))):
        raise ContractError(f"{name} must be diagonal")
    if np.any(~np.isfinite(matrix)) or np.any(np.diag(matrix) < 0.0):
        raise ContractError(f"{name} must have finite non-negative variances")
    matrix.setflags(write=False)
    return matrix


@dataclass(frozen=True, eq=False)
class TrueState:
    """Physical state of charge of every battery, each element in [0, 1]."""

    soc: np.ndarray

    def __post_init__(self) -> None:
        soc = np.array(self.soc, dtype=float)
        if soc.ndim != 1 or soc.size == 0:
            raise ContractError(f"SOC must be a non-empty vector, got {soc.shape}")
        if np.any(~np.isfinite(soc)) or np.any(soc < 0.0) or np.any(soc > 1.0):
            raise ContractError(f"SOC must lie in [0, 1], got {soc}")
        soc.setflags(write=False)
        object.__setattr__(self, "soc", soc)

    @classmethod
    def clamped(cls, soc: Sequence[float] | np.ndarray) -> TrueState:
        """Build a state after clamping every element to [0, 1]."""
        return cls(np.clip(np.asarray(soc, dtype=float), 0.0, 1.0))


def sample_diagonal_noise(covariance: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw N(0, covariance) for a diagonal covariance.

    Always consumes one standard normal per element, including zero-variance
    elements, so paired runs stay aligned on the same stream.
    """
    return np.sqrt(np.diag(covariance)) * rng.standard_normal(covariance.shape[0])


def step_truth(
    model: SystemModel,
    state: TrueState,
    current: Any,
    rng: np.random.Generator,
) -> TrueState:
    """Advance the true SOC one step: clamp(x + diag(g) I + w, 0, 1).

    Raises:
        ContractError: If the applied current violates the input bounds
    """
    current = model.check_input(current)
    if state.soc.shape != (model.n,):
        raise ContractError(
            f"State must have shape ({model.n},), got {state.soc.shape}"
        )
    noise = sample_diagonal_noise(model.sigma_w, rng)
    return TrueState.clamped(state.soc + model.gains * current + noise)


def observe(
    model: SystemModel, state: TrueState, rng: np.random.Generator
) -> np.ndarray:
    """Noisy OCV measurement y = h(x) + v of every battery."""
    if state.soc.shape != (model.n,):
        raise ContractError(
            f"State must have shape ({model.n},), got {state.soc.shape}"
        )
    return model.ocv_values(state.soc) + sample_diagonal_noise(model.sigma_v, rng)
