# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Certainty-equivalence linear MPC on the Coulomb-counting dynamics."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np

from ..errors import ContractError, InfeasibleProblemError
from ..model.plant import SystemModel
from ..qp.admm import QpSolution, QpStatus, solve_qp
from .condensed import build_condensed_problem

if TYPE_CHECKING:
    from .dual import DualControlConfig

logger = logging.getLogger(__name__)

# Slack on plan inputs relative to the battery current bounds
PLAN_BOUND_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class ControlPlan:
    """Input trajectory over the horizon and the state trajectory backing it.

    Attributes:
        inputs: (N+1, n) currents; inputs[0] is applied in closed loop
        predicted_means: (N+1, n) predicted SOC trajectory
        surrogate_value: Ranking score (None for plain linear MPC)
        candidate_scores: Score of every dual-control candidate, None where
            the candidate was discarded
        selected_candidate: Index of the winning candidate
        qp_solution: Raw QP solution the inputs came from, for warm starts
    """

    inputs: np.ndarray
    predicted_means: np.ndarray
    surrogate_value: float | None = None
    candidate_scores: tuple[float | None, ...] = ()
    selected_candidate: int | None = None
    qp_solution: QpSolution | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        inputs = np.array(self.inputs, dtype=float)
        means = np.array(self.predicted_means, dtype=float)
        if inputs.ndim != 2 or inputs.shape[0] == 0:
            raise ContractError(f"Plan inputs must have shape (N+1, n), got {inputs.shape}")
        if means.shape != inputs.shape:
            raise ContractError(
                f"Plan means must match inputs shape {inputs.shape}, got {means.shape}"
            )
        inputs.setflags(write=False)
        means.setflags(write=False)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "predicted_means", means)
        object.__setattr__(self, "candidate_scores", tuple(self.candidate_scores))

    @property
    def horizon(self) -> int:
        """N."""
        return self.inputs.shape[0] - 1

    @property
    def first_input(self) -> np.ndarray:
        """I_{k0}, the input applied under receding-horizon control."""
        return self.inputs[0]

    def within_bounds(
        self, model: SystemModel, tol: float = PLAN_BOUND_TOLERANCE
    ) -> bool:
        """True if every input respects the model's current bounds."""
        return bool(
            np.all(self.inputs >= model.i_min - tol)
            and np.all(self.inputs <= model.i_max + tol)
        )


def clip_inputs(model: SystemModel, inputs: Any) -> np.ndarray:
    """Project an (N+1, n) input sequence onto the current bounds."""
    return np.clip(np.asarray(inputs, dtype=float), model.i_min, model.i_max)


def solve_linear_mpc(
    model: SystemModel,
    x0: Any,
    cfg: DualControlConfig,
    k0: int = 0,
    warm_start: QpSolution | None = None,
) -> ControlPlan:
    """Certainty-equivalence MPC: track the reference as if x0 were exact.

    The uniformity term and the covariance are ignored. x0 is clamped to
    [0, 1] before condensing so the zero plan stays feasible.

    Args:
        model: System model
        x0: Initial SOC estimate
        cfg: Controller settings (cost, horizon and QP settings are used)
        k0: Absolute step of x0
        warm_start: Optional previous QP solution

    Returns:
        ControlPlan with inputs clipped to bounds and the implied states

    Raises:
        InfeasibleProblemError: If the QP is reported infeasible
    """
    x0 = np.clip(np.asarray(x0, dtype=float), 0.0, 1.0)
    problem = build_condensed_problem(model, cfg.cost, x0, k0, uniformity_weight=0.0)
    solution = solve_qp(
        problem.qp, tol=cfg.qp_tol, max_iter=cfg.qp_max_iter, warm_start=warm_start
    )

    if solution.status is QpStatus.INFEASIBLE:
        raise InfeasibleProblemError(f"Linear MPC is infeasible from x0={x0}")
    if solution.status is QpStatus.MAX_ITERATIONS:
        logger.warning(
            f"Linear MPC hit the iteration limit at step {k0} "
            f"(primal {solution.primal_residual:.2e}, "
            f"dual {solution.dual_residual:.2e}); using clipped iterate"
        )

    inputs = clip_inputs(model, problem.unstack(solution.point))
    return ControlPlan(
        inputs=inputs,
        predicted_means=problem.states(inputs),
        qp_solution=solution,
    )
