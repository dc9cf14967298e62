# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Condensed (state-eliminated) MPC quadratic programs.

Inputs over the horizon are stacked as ``u = [I_0; I_1; ...; I_N]`` and the
predicted states ``X = [x_0; ...; x_N]`` follow ``X = 1 (x) x0 + S u`` where
block (k, j) of S is diag(g) for j < k. Substituting X into the stage costs
gives a QP in u alone.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..cost.functional import CostSpec, uniformity_matrix
from ..errors import ContractError
from ..model.plant import SystemModel
from ..qp.admm import QpProblem

logger = logging.getLogger(__name__)


def prediction_matrix(gains: np.ndarray, horizon: int) -> np.ndarray:
    """S with ``X = 1 (x) x0 + S u``, shape (n(N+1), n(N+1))."""
    strictly_lower = np.tril(np.ones((horizon + 1, horizon + 1)), k=-1)
    return np.kron(strictly_lower, np.diag(gains))


@dataclass(frozen=True, eq=False)
class CondensedProblem:
    """A condensed MPC QP plus what is needed to map solutions back to states.

    Attributes:
        qp: The QP in the stacked inputs
        constant: Objective terms independent of the inputs
        prediction: S, the input-to-state map
        free_response: 1 (x) x0, the zero-input state trajectory
        n: Number of batteries
    """

    qp: QpProblem
    constant: float
    prediction: np.ndarray
    free_response: np.ndarray
    n: int

    @property
    def horizon(self) -> int:
        """N."""
        return self.free_response.size // self.n - 1

    def states(self, inputs: np.ndarray) -> np.ndarray:
        """Predicted states (N+1, n) under stacked or (N+1, n) inputs."""
        stacked = np.asarray(inputs, dtype=float).reshape(-1)
        return (self.free_response + self.prediction @ stacked).reshape(-1, self.n)

    def value(self, inputs: np.ndarray) -> float:
        """Full objective including the input-independent constant."""
        stacked = np.asarray(inputs, dtype=float).reshape(-1)
        return self.qp.objective(stacked) + self.constant

    def unstack(self, point: np.ndarray) -> np.ndarray:
        """Reshape a QP point to (N+1, n) inputs."""
        return np.asarray(point, dtype=float).reshape(-1, self.n)


def build_condensed_problem(
    model: SystemModel,
    cost: CostSpec,
    x0: np.ndarray,
    k0: int = 0,
    uniformity_weight: float | None = None,
    extra_grad: np.ndarray | None = None,
    extra_constant: float = 0.0,
) -> CondensedProblem:
    """Condense tracking, effort and uniformity costs over the horizon.

    The objective is::

        sum_k  c (Q^T x_k - r_k)^2 + I_k^T R I_k + c0' x_k^T L x_k
             + extra_grad^T u + extra_constant

    subject to input boxes and ``0 <= x_k <= 1`` for k = 1..N.

    Args:
        model: System model (gains and input bounds)
        cost: Cost weights; ``cost.horizon`` fixes N
        x0: Initial state, must lie in [0, 1]
        k0: Absolute step of x0 (selects the reference window)
        uniformity_weight: c0' (defaults to ``cost.c0``; 0 drops the term)
        extra_grad: Additional linear term on the stacked inputs
        extra_constant: Additional constant (e.g. frozen covariance terms)

    Returns:
        CondensedProblem

    Raises:
        ContractError: If dimensions disagree or x0 is outside [0, 1]
    """
    n = model.n
    if cost.n != n:
        raise ContractError(f"Cost is sized for {cost.n} batteries, model has {n}")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (n,):
        raise ContractError(f"x0 must have shape ({n},), got {x0.shape}")
    if np.any(x0 < 0.0) or np.any(x0 > 1.0):
        raise ContractError(f"x0 must lie in [0, 1], got {x0}")

    horizon = cost.horizon
    steps = horizon + 1
    c0 = cost.c0 if uniformity_weight is None else uniformity_weight

    prediction = prediction_matrix(model.gains, horizon)
    free_response = np.tile(x0, steps)
    references = cost.reference_window(k0)

    tracking_rows = np.kron(np.eye(steps), cost.q_cap[None, :])
    effort = np.kron(np.eye(steps), cost.r_weight)
    spread = np.kron(np.eye(steps), uniformity_matrix(n))

    tracking_map = tracking_rows @ prediction
    tracking_offset = tracking_rows @ free_response - references
    spread_map = spread @ prediction

    hess = 2.0 * (
        cost.c * tracking_map.T @ tracking_map + effort + c0 * prediction.T @ spread_map
    )
    grad = 2.0 * (
        cost.c * tracking_map.T @ tracking_offset + c0 * spread_map.T @ free_response
    )
    constant = cost.c * float(tracking_offset @ tracking_offset) + c0 * float(
        free_response @ spread @ free_response
    )
    if extra_grad is not None:
        extra_grad = np.asarray(extra_grad, dtype=float).reshape(-1)
        if extra_grad.shape != grad.shape:
            raise ContractError(
                f"extra_grad must have shape {grad.shape}, got {extra_grad.shape}"
            )
        grad = grad + extra_grad
    constant += extra_constant

    # x_0 is fixed, so only rows k = 1..N constrain the inputs
    state_map = prediction[n:]
    state_free = free_response[n:]
    ineq_mat = np.vstack([state_map, -state_map])
    ineq_rhs = np.concatenate([1.0 - state_free, state_free])

    qp = QpProblem(
        hess=0.5 * (hess + hess.T),
        grad=grad,
        ineq_mat=ineq_mat,
        ineq_rhs=ineq_rhs,
        lower=np.tile(model.i_min, steps),
        upper=np.tile(model.i_max, steps),
    )
    return CondensedProblem(
        qp=qp,
        constant=constant,
        prediction=prediction,
        free_response=free_response,
        n=n,
    )
