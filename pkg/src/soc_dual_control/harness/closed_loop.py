# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Closed-loop simulation of one controller against the noisy plant."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np
import pandas as pd

from ..cost.functional import stage_cost_sample
from ..errors import ContractError
from ..estimator.ekf import Belief, ekf_measurement_update, ekf_time_update
from ..model.plant import TrueState, observe, step_truth
from ..mpc.base import Controller
from ..mpc.factory import ControllerFactory
from .config import ExperimentConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RunRecord:
    """Metrics and per-step traces of one closed-loop run.

    Attributes:
        controller: Controller arm name
        seed: Per-run seed
        realized_cost: Sum of the T+1 realized stage costs
        mean_estimation_error: Time average of ||x_k - x_{k|k}||_2
        mean_cov_trace: Time average of trace(Sigma_{k|k})
        truth: (T+1, n) true SOC
        estimates: (T+1, n) filtered means
        cov_traces: (T+1,) trace of the filtered covariances
        inputs: (T+1, n) applied currents
        measurements: (T, n) voltages y_1..y_T
        measurement_noise: (T, n) realized y_k - h(x_k)
        stage_costs: (T+1,) realized stage costs
        step_times: (T+1,) controller wall-clock per step in seconds
    """

    controller: str
    seed: int
    realized_cost: float
    mean_estimation_error: float
    mean_cov_trace: float
    truth: np.ndarray
    estimates: np.ndarray
    cov_traces: np.ndarray
    inputs: np.ndarray
    measurements: np.ndarray
    measurement_noise: np.ndarray
    stage_costs: np.ndarray
    step_times: np.ndarray

    @property
    def steps(self) -> int:
        """T."""
        return self.truth.shape[0] - 1

    @property
    def mean_step_ms(self) -> float:
        """Mean controller time per step in milliseconds."""
        return float(np.mean(self.step_times) * 1000.0)

    def trace_frame(self) -> pd.DataFrame:
        """Per-step trace as a DataFrame, one row per step k = 0..T.

        The measurement columns are empty at k = 0, where the initial belief
        is used without a measurement.
        """
        n = self.truth.shape[1]
        columns: dict[str, np.ndarray] = {"k": np.arange(self.steps + 1)}
        padded = np.vstack([np.full((1, n), np.nan), self.measurements])
        for i in range(n):
            columns[f"x_{i}"] = self.truth[:, i]
        for i in range(n):
            columns[f"xhat_{i}"] = self.estimates[:, i]
        columns["cov_trace"] = self.cov_traces
        for i in range(n):
            columns[f"i_{i}"] = self.inputs[:, i]
        for i in range(n):
            columns[f"y_{i}"] = padded[:, i]
        columns["stage_cost"] = self.stage_costs
        frame = pd.DataFrame(columns)
        frame.insert(0, "controller", self.controller)
        return frame


def run_closed_loop(
    cfg: ExperimentConfig,
    seed: int,
    controller: str | Controller | None = None,
) -> RunRecord:
    """Simulate one run of ``T+1`` steps.

    The plant and controller draw from separate streams spawned from ``seed``,
    so two controllers run with the same seed see the same initial state and
    (step for step) the same noise draws.

    Per step k: plan from the current belief, apply the first input, record the
    stage cost; for k < T step the truth, measure, and run the EKF time and
    measurement updates.

    Args:
        cfg: Experiment configuration
        seed: Per-run seed
        controller: Arm name or controller instance (defaults to
            ``cfg.controller``, which must then name a single arm)

    Returns:
        RunRecord with metrics and traces
    """
    if seed < 0:
        raise ContractError(f"seed must be non-negative, got {seed}")
    plant_seed, controller_seed = np.random.SeedSequence(seed).spawn(2)
    plant_rng = np.random.default_rng(plant_seed)
    controller_rng = np.random.default_rng(controller_seed)

    if controller is None:
        controller = cfg.controller
    if isinstance(controller, str):
        if controller == "both":
            raise ContractError("run_closed_loop needs a single controller arm")
        controller = ControllerFactory.create_controller(
            controller, cfg.model, cfg.controller_config(), controller_rng
        )

    model = cfg.model
    n = model.n
    steps = cfg.steps

    initial = plant_rng.multivariate_normal(cfg.x0_mean, cfg.x0_cov, method="eigh")
    state = TrueState.clamped(initial)
    belief = Belief(mean=cfg.x0_mean, cov=cfg.x0_cov)

    truth = np.empty((steps + 1, n))
    estimates = np.empty((steps + 1, n))
    cov_traces = np.empty(steps + 1)
    inputs = np.empty((steps + 1, n))
    measurements = np.empty((steps, n))
    noise = np.empty((steps, n))
    stage_costs = np.empty(steps + 1)
    step_times = np.empty(steps + 1)

    logger.debug(f"Run seed={seed} ({controller.name}) starting from {state.soc}")
    for k in range(steps + 1):
        started = time.perf_counter()
        plan = controller.plan(belief, k)
        step_times[k] = time.perf_counter() - started

        current = np.clip(plan.first_input, model.i_min, model.i_max)
        truth[k] = state.soc
        estimates[k] = belief.mean
        cov_traces[k] = belief.cov_trace
        inputs[k] = current
        stage_costs[k] = stage_cost_sample(
            cfg.cost, state.soc, current, cfg.cost.reference_at(k)
        )

        if k == steps:
            break

        state = step_truth(model, state, current, plant_rng)
        measurement = observe(model, state, plant_rng)
        measurements[k] = measurement
        noise[k] = measurement - model.ocv_values(state.soc)
        logger.debug(f"Step {k + 1}: measurement noise {noise[k]}")

        belief = ekf_measurement_update(
            model, ekf_time_update(model, belief, current), measurement
        )

    errors = np.linalg.norm(truth - estimates, axis=1)
    record = RunRecord(
        controller=controller.name,
        seed=seed,
        realized_cost=float(np.sum(stage_costs)),
        mean_estimation_error=float(np.mean(errors)),
        mean_cov_trace=float(np.mean(cov_traces)),
        truth=truth,
        estimates=estimates,
        cov_traces=cov_traces,
        inputs=inputs,
        measurements=measurements,
        measurement_noise=noise,
        stage_costs=stage_costs,
        step_times=step_times,
    )
    logger.debug(
        f"Run seed={seed} ({controller.name}) finished: cost {record.realized_cost:.4f}, "
        f"error {record.mean_estimation_error:.4f}, trace {record.mean_cov_trace:.4f}"
    )
    return record
