# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Tracking, effort and uniformity cost functionals.

The stage cost combines a capacity-weighted tracking term, a quadratic input
effort and a pairwise SOC-uniformity penalty::

    c (Q^T x - r)^2 + I^T R I + c0 sum_{i<j} (x_i - x_j)^2

The pairwise sum equals ``x^T L x`` with ``L = n I - 1 1^T``, which is the form
used throughout so that Gaussian expectations reduce to traces.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..errors import ContractError
from ..estimator.rollout import SurrogateRollout
from ..model.plant import TrueState

logger = logging.getLogger(__name__)


def uniformity_matrix(n: int) -> np.ndarray:
    """L = n I - 1 1^T, so that x^T L x = sum_{i<j} (x_i - x_j)^2."""
    return n * np.eye(n) - np.ones((n, n))


@dataclass(frozen=True, eq=False)
class CostSpec:
    """Weights of the stage cost and the planning horizon.

    Attributes:
        c: Tracking weight (>= 0)
        c0: Uniformity weight (>= 0)
        q_cap: Battery capacities Q (n,), all positive
        r_weight: Input effort matrix R (n, n), symmetric positive definite
        reference: Total-charge reference; a scalar or one value per step (the
            last value is held beyond the end)
        horizon: Prediction horizon N (>= 1)
    """

    c: float
    c0: float
    q_cap: np.ndarray
    r_weight: np.ndarray
    reference: float | Sequence[float] | np.ndarray
    horizon: int

    def __post_init__(self) -> None:
        for name in ("c", "c0"):
            value = float(getattr(self, name))
            if not np.isfinite(value) or value < 0.0:
                raise ContractError(f"{name} must be finite and non-negative, got {value}")
            object.__setattr__(self, name, value)

        q_cap = np.array(self.q_cap, dtype=float)
        if q_cap.ndim != 1 or q_cap.size == 0:
            raise ContractError(f"q_cap must be a non-empty vector, got {q_cap.shape}")
        if not np.all(np.isfinite(q_cap)) or np.any(q_cap <= 0.0):
            raise ContractError(f"q_cap must have positive elements, got {q_cap}")

        n = q_cap.size
        r_weight = np.array(self.r_weight, dtype=float)
        if r_weight.shape != (n, n):
            raise ContractError(
                f"r_weight must have shape ({n}, {n}), got {r_weight.shape}"
            )
        if not np.all(np.isfinite(r_weight)) or not np.allclose(
            r_weight, r_weight.T, rtol=0.0, atol=1e-10
        ):
            raise ContractError("r_weight must be finite and symmetric")
        if np.min(np.linalg.eigvalsh(r_weight)) <= 0.0:
            raise ContractError("r_weight must be positive definite")

        reference = np.atleast_1d(np.array(self.reference, dtype=float))
        if reference.ndim != 1 or reference.size == 0:
            raise ContractError("reference must be a scalar or a non-empty sequence")
        if not np.all(np.isfinite(reference)):
            raise ContractError(f"reference must be finite, got {reference}")

        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ContractError(f"horizon must be an integer >= 1, got {self.horizon}")

        for array in (q_cap, r_weight, reference):
            array.setflags(write=False)
        object.__setattr__(self, "q_cap", q_cap)
        object.__setattr__(self, "r_weight", r_weight)
        object.__setattr__(self, "reference", reference)
        object.__setattr__(self, "horizon", int(self.horizon))

    @property
    def n(self) -> int:
        """Number of batteries the weights are sized for."""
        return self.q_cap.size

    @property
    def uniformity(self) -> np.ndarray:
        """Uniformity matrix L for this dimension."""
        return uniformity_matrix(self.n)

    def reference_at(self, k: int) -> float:
        """Reference r_k at absolute step ``k``."""
        if k < 0:
            raise ContractError(f"Step index must be non-negative, got {k}")
        reference = self.reference
        return float(reference[min(k, reference.size - 1)])

    def reference_window(self, k0: int, length: int | None = None) -> np.ndarray:
        """References r_{k0}..r_{k0+length-1} (default length N+1)."""
        length = self.horizon + 1 if length is None else length
        return np.array([self.reference_at(k0 + k) for k in range(length)])

    def with_horizon(self, horizon: int) -> CostSpec:
        """Copy with a different horizon."""
        return CostSpec(
            c=self.c,
            c0=self.c0,
            q_cap=self.q_cap,
            r_weight=self.r_weight,
            reference=self.reference,
            horizon=horizon,
        )


def _vector(name: str, value: Any, n: int) -> np.ndarray:
    array = np.asarray(value, dtype=float)
    if array.shape != (n,):
        raise ContractError(f"{name} must have shape ({n},), got {array.shape}")
    return array


def stage_cost_sample(spec: CostSpec, x: Any, current: Any, r: float) -> float:
    """Stage cost at a concrete state.

    Returns:
        c (Q^T x - r)^2 + I^T R I + c0 sum_{i<j} (x_i - x_j)^2
    """
    x = _vector("x", x, spec.n)
    current = _vector("input", current, spec.n)
    tracking = float(spec.q_cap @ x) - r
    return (
        spec.c * tracking**2
        + float(current @ spec.r_weight @ current)
        + spec.c0 * float(x @ spec.uniformity @ x)
    )


def covariance_cost(spec: CostSpec, cov: np.ndarray) -> float:
    """Part of the conditional stage cost contributed by the covariance.

    Returns:
        c Q^T cov Q + c0 tr(L cov)
    """
    return spec.c * float(spec.q_cap @ cov @ spec.q_cap) + spec.c0 * float(
        np.sum(spec.uniformity * cov)
    )


def conditional_stage_cost(
    spec: CostSpec, mean: Any, cov: Any, current: Any, r: float
) -> float:
    """Expected stage cost for x ~ N(mean, cov).

    Equals the stage cost at the mean plus ``c Q^T cov Q`` and the pairwise
    variance terms ``c0 sum_{i<j} (cov_ii - 2 cov_ij + cov_jj)``.
    """
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (spec.n, spec.n):
        raise ContractError(f"cov must have shape ({spec.n}, {spec.n}), got {cov.shape}")
    return stage_cost_sample(spec, mean, current, r) + covariance_cost(spec, cov)


def _controls(controls: Any, n: int) -> np.ndarray:
    array = np.asarray(controls, dtype=float)
    if array.ndim != 2 or array.shape[1] != n:
        raise ContractError(f"Controls must have shape (T, {n}), got {array.shape}")
    return array


def surrogate_cost(
    spec: CostSpec, rollout: SurrogateRollout, controls: Any, k0: int = 0
) -> float:
    """Deterministic surrogate: conditional stage costs summed over a rollout.

    Args:
        spec: Cost weights
        rollout: Prediction-only rollout backing the plan
        controls: (N+1, n) inputs, aligned with the rollout
        k0: Absolute step of the first element (selects the reference window)

    Raises:
        ContractError: If rollout and controls differ in length
    """
    controls = _controls(controls, spec.n)
    if controls.shape[0] != len(rollout):
        raise ContractError(
            f"Rollout length {len(rollout)} does not match {controls.shape[0]} controls"
        )
    return float(
        sum(
            conditional_stage_cost(spec, mean, cov, current, spec.reference_at(k0 + k))
            for k, (mean, cov, current) in enumerate(
                zip(rollout.means, rollout.covs, controls, strict=True)
            )
        )
    )


def realized_cost(
    spec: CostSpec,
    truth_traj: Sequence[TrueState] | np.ndarray,
    controls: Any,
    k0: int = 0,
) -> float:
    """Sample of the stochastic cost along a realized closed-loop run.

    Args:
        spec: Cost weights
        truth_traj: True states x_0..x_T (TrueState objects or a (T+1, n) array)
        controls: Applied inputs I_0..I_T
        k0: Absolute step of the first element

    Raises:
        ContractError: If trajectory and controls differ in length
    """
    states = np.array(
        [s.soc if isinstance(s, TrueState) else s for s in truth_traj], dtype=float
    )
    controls = _controls(controls, spec.n)
    if states.shape[0] != controls.shape[0]:
        raise ContractError(
            f"Trajectory length {states.shape[0]} does not match "
            f"{controls.shape[0]} controls"
        )
    return float(
        sum(
            stage_cost_sample(spec, x, current, spec.reference_at(k0 + k))
            for k, (x, current) in enumerate(zip(states, controls, strict=True))
        )
    )
