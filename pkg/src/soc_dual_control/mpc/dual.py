# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Randomized dual control over the information state.

Each step builds L candidate input trajectories. Candidate 0 starts from the
current estimate; the others start from initial states sampled from the
belief and from perturbed linear-MPC inputs, which diversifies where the OCV
slopes are evaluated. Every candidate solves a linear parameter-varying (LPV)
MPC with the anticipated covariances frozen along its nominal trajectory, and
is then rescored with the exact prediction-only surrogate from the current
belief. The cheapest candidate wins.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..cost.functional import CostSpec, covariance_cost, surrogate_cost
from ..errors import ContractError, InfeasibleProblemError
from ..estimator.ekf import Belief
from ..estimator.rollout import prediction_only_rollout
from ..model.plant import SystemModel
from ..qp.admm import DEFAULT_MAX_ITER, DEFAULT_TOL, QpStatus, solve_qp
from .condensed import build_condensed_problem
from .linear import ControlPlan, clip_inputs, solve_linear_mpc

logger = logging.getLogger(__name__)

DEFAULT_CANDIDATES = 35

LINEARIZATIONS = ("frozen", "first-order")

# Step of the central differences used by the first-order linearization
GRADIENT_STEP = 1e-4


@dataclass(frozen=True, eq=False)
class DualControlConfig:
    """Settings shared by linear MPC and the dual controller.

    Attributes:
        cost: Cost weights and reference
        num_candidates: L, candidates per dual step (>= 1)
        horizon: N; defaults to ``cost.horizon`` and overrides it when given
        qp_tol: QP residual tolerance
        qp_max_iter: QP iteration budget
        linearization: ``"frozen"`` keeps anticipated covariances constant in
            the LPV step; ``"first-order"`` adds their input gradient
        workers: Threads used to evaluate candidates (1 = serial)
    """

    cost: CostSpec
    num_candidates: int = DEFAULT_CANDIDATES
    horizon: int | None = None
    qp_tol: float = DEFAULT_TOL
    qp_max_iter: int = DEFAULT_MAX_ITER
    linearization: str = "frozen"
    workers: int = 1

    def __post_init__(self) -> None:
        if self.num_candidates < 1:
            raise ContractError(
                f"num_candidates must be at least 1, got {self.num_candidates}"
            )
        if self.horizon is None:
            object.__setattr__(self, "horizon", self.cost.horizon)
        elif self.horizon != self.cost.horizon:
            object.__setattr__(self, "cost", self.cost.with_horizon(self.horizon))
        if not self.qp_tol > 0:
            raise ContractError(f"qp_tol must be positive, got {self.qp_tol}")
        if self.qp_max_iter < 1:
            raise ContractError(f"qp_max_iter must be at least 1, got {self.qp_max_iter}")
        if self.linearization not in LINEARIZATIONS:
            raise ContractError(
                f"linearization must be one of {LINEARIZATIONS}, got {self.linearization!r}"
            )
        if self.workers < 1:
            raise ContractError(f"workers must be at least 1, got {self.workers}")


def _covariance_total(cost: CostSpec, covs: np.ndarray) -> float:
    return float(sum(covariance_cost(cost, cov) for cov in covs))


def covariance_gradient(
    model: SystemModel, cost: CostSpec, init: Belief, inputs: np.ndarray
) -> np.ndarray:
    """Gradient of the summed covariance cost with respect to stacked inputs.

    Central differences of the prediction-only rollout, one-sided where an
    input sits on its bound.
    """
    inputs = np.asarray(inputs, dtype=float)
    steps, n = inputs.shape
    gradient = np.zeros(steps * n)
    # The last input never reaches a covariance
    for k in range(steps - 1):
        for i in range(n):
            up = inputs.copy()
            down = inputs.copy()
            up[k, i] = min(inputs[k, i] + GRADIENT_STEP, model.i_max[i])
            down[k, i] = max(inputs[k, i] - GRADIENT_STEP, model.i_min[i])
            width = up[k, i] - down[k, i]
            if width <= 0.0:
                continue
            upper = _covariance_total(cost, prediction_only_rollout(model, init, up).covs)
            lower = _covariance_total(cost, prediction_only_rollout(model, init, down).covs)
            gradient[k * n + i] = (upper - lower) / width
    return gradient


def lpv_candidate(
    model: SystemModel,
    cfg: DualControlConfig,
    init: Belief,
    nominal: ControlPlan,
    frozen_covs: Any,
    k0: int = 0,
) -> ControlPlan | None:
    """Solve the LPV MPC linearized about a nominal plan.

    Anticipated covariances are frozen at ``frozen_covs``, so they add a
    constant to the objective and the QP keeps the constraint set of linear
    MPC plus the uniformity quadratic. Under ``"first-order"`` linearization
    their input gradient at the nominal inputs is added as a linear term.

    Args:
        model: System model
        cfg: Controller settings
        init: Belief the candidate starts from (mean clamped for the QP)
        nominal: Trajectory the problem is linearized about
        frozen_covs: (N+1, n, n) anticipated covariances along the nominal
        k0: Absolute step of the start

    Returns:
        ControlPlan whose surrogate_value is the LPV objective, or None when
        the QP is infeasible or runs out of iterations

    Raises:
        ContractError: If the nominal or the frozen covariances do not span
            the horizon
    """
    cost = cfg.cost
    frozen_covs = np.asarray(frozen_covs, dtype=float)
    steps = cost.horizon + 1
    if nominal.inputs.shape != (steps, model.n):
        raise ContractError(
            f"Nominal plan must have shape ({steps}, {model.n}), got {nominal.inputs.shape}"
        )
    if frozen_covs.shape != (steps, model.n, model.n):
        raise ContractError(
            f"Frozen covariances must have shape ({steps}, {model.n}, {model.n}), "
            f"got {frozen_covs.shape}"
        )

    constant = _covariance_total(cost, frozen_covs)
    extra_grad = None
    if cfg.linearization == "first-order":
        extra_grad = covariance_gradient(model, cost, init, nominal.inputs)
        constant -= float(extra_grad @ nominal.inputs.reshape(-1))

    x_start = np.clip(init.mean, 0.0, 1.0)
    problem = build_condensed_problem(
        model, cost, x_start, k0, extra_grad=extra_grad, extra_constant=constant
    )
    solution = solve_qp(
        problem.qp,
        tol=cfg.qp_tol,
        max_iter=cfg.qp_max_iter,
        warm_start=nominal.qp_solution,
    )
    if solution.status is not QpStatus.OPTIMAL:
        logger.debug(f"LPV candidate discarded: {solution.status.value}")
        return None

    inputs = clip_inputs(model, problem.unstack(solution.point))
    return ControlPlan(
        inputs=inputs,
        predicted_means=problem.states(inputs),
        surrogate_value=problem.value(inputs),
        qp_solution=solution,
    )


def _score(
    model: SystemModel, cfg: DualControlConfig, belief: Belief, inputs: np.ndarray, k0: int
) -> tuple[float, np.ndarray]:
    rollout = prediction_only_rollout(model, belief, inputs)
    return surrogate_cost(cfg.cost, rollout, inputs, k0), rollout.means


def _candidate(
    model: SystemModel,
    cfg: DualControlConfig,
    belief: Belief,
    index: int,
    seed: np.random.SeedSequence,
    k0: int,
) -> tuple[ControlPlan | None, ControlPlan | None]:
    """Build and score one candidate.

    Returns:
        Tuple of (scored candidate or None, the linear-MPC plan it started from)
    """
    rng = np.random.default_rng(seed)
    steps = cfg.cost.horizon + 1

    if index == 0:
        x_start = np.clip(belief.mean, 0.0, 1.0)
    else:
        sampled = rng.multivariate_normal(belief.mean, belief.cov, method="eigh")
        x_start = np.clip(sampled, 0.0, 1.0)

    try:
        linear = solve_linear_mpc(model, x_start, cfg, k0)
    except InfeasibleProblemError as e:
        logger.debug(f"Candidate {index} discarded: {e}")
        return None, None

    start = Belief(mean=x_start, cov=belief.cov)
    # Slopes are evaluated along the linear-MPC states, so the rollout uses I*
    frozen_covs = prediction_only_rollout(model, start, linear.inputs).covs

    nominal = linear
    if index > 0:
        perturbation = rng.multivariate_normal(
            np.zeros(model.n), belief.cov, size=steps, method="eigh"
        )
        nominal = ControlPlan(
            inputs=clip_inputs(model, linear.inputs + perturbation),
            predicted_means=linear.predicted_means,
            qp_solution=linear.qp_solution,
        )

    candidate = lpv_candidate(model, cfg, start, nominal, frozen_covs, k0)
    if candidate is None:
        return None, linear

    score, means = _score(model, cfg, belief, candidate.inputs, k0)
    logger.debug(f"Candidate {index} scored {score:.6g}")
    return (
        ControlPlan(
            inputs=candidate.inputs,
            predicted_means=means,
            surrogate_value=score,
            qp_solution=candidate.qp_solution,
        ),
        linear,
    )


def dual_control_step(
    model: SystemModel,
    cfg: DualControlConfig,
    belief: Belief,
    rng: np.random.Generator,
    k0: int = 0,
) -> ControlPlan:
    """One step of randomized dual control.

    Args:
        model: System model
        cfg: Controller settings
        belief: Current information state
        rng: Controller random source; one draw seeds the per-candidate streams
        k0: Absolute step (selects the reference window)

    Returns:
        The lowest-scoring feasible candidate (ties go to the lowest index),
        with every candidate's score recorded. If no candidate is feasible the
        clipped linear-MPC plan from the current estimate is returned.
    """
    if belief.n != model.n:
        raise ContractError(
            f"Belief dimension {belief.n} does not match model dimension {model.n}"
        )
    entropy = int(rng.integers(np.iinfo(np.int64).max))
    seeds = np.random.SeedSequence(entropy).spawn(cfg.num_candidates)

    def evaluate(index: int) -> tuple[ControlPlan | None, ControlPlan | None]:
        return _candidate(model, cfg, belief, index, seeds[index], k0)

    indices = range(cfg.num_candidates)
    if cfg.workers > 1 and cfg.num_candidates > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as executor:
            results = list(executor.map(evaluate, indices))
    else:
        results = [evaluate(index) for index in indices]

    scores = tuple(
        None if plan is None else plan.surrogate_value for plan, _ in results
    )
    feasible = [i for i, score in enumerate(scores) if score is not None]

    if not feasible:
        logger.warning(
            f"All {cfg.num_candidates} dual-control candidates infeasible at step {k0}; "
            f"falling back to linear MPC"
        )
        return _fallback_plan(model, cfg, belief, results[0][1], scores, k0)

    # min() keeps the first of equal scores
    winner = min(feasible, key=lambda i: scores[i])
    plan = results[winner][0]
    assert plan is not None
    logger.debug(f"Dual step {k0}: candidate {winner} wins with J={scores[winner]:.6g}")
    return ControlPlan(
        inputs=plan.inputs,
        predicted_means=plan.predicted_means,
        surrogate_value=plan.surrogate_value,
        candidate_scores=scores,
        selected_candidate=winner,
        qp_solution=plan.qp_solution,
    )


def _fallback_plan(
    model: SystemModel,
    cfg: DualControlConfig,
    belief: Belief,
    linear: ControlPlan | None,
    scores: tuple[float | None, ...],
    k0: int,
) -> ControlPlan:
    if linear is None:
        # Linear MPC failed too; hold the current as close to zero as allowed
        inputs = clip_inputs(model, np.zeros((cfg.cost.horizon + 1, model.n)))
    else:
        inputs = clip_inputs(model, linear.inputs)
    score, means = _score(model, cfg, belief, inputs, k0)
    return ControlPlan(
        inputs=inputs,
        predicted_means=means,
        surrogate_value=score,
        candidate_scores=scores,
        selected_candidate=None,
    )
