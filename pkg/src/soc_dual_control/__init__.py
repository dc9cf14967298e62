# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""SOC Dual Control - dual control of battery state of charge.

Plans charging currents for several batteries so that the total charge tracks a
reference while the currents also steer the SOCs into regions where the
open-circuit voltage reveals them, improving the extended Kalman filter's
estimates. Includes a paired Monte Carlo comparison against certainty-
equivalence linear MPC.

Simple usage:
    import socdc
    summary = socdc.run_monte_carlo(socdc.reference_config(), runs=10)
"""

__version__ = "0.1.0"
__author__ = "Fuse Technical Group"

from .cost import (
    CostSpec,
    conditional_stage_cost,
    realized_cost,
    stage_cost_sample,
    surrogate_cost,
)
from .errors import (
    ConfigError,
    ContractError,
    DomainError,
    DualControlError,
    InfeasibleProblemError,
    NumericalError,
    RunFailedError,
)
from .estimator import (
    Belief,
    SurrogateRollout,
    ekf_measurement_update,
    ekf_time_update,
    prediction_only_rollout,
)
from .harness import (
    ExperimentConfig,
    McSummary,
    RunRecord,
    load_config,
    reference_config,
    run_closed_loop,
    run_monte_carlo,
)
from .model import (
    BatteryParams,
    OcvCurve,
    SystemModel,
    TrueState,
    observe,
    ocv_eval,
    ocv_slope,
    reference_system_model,
    step_truth,
)
from .mpc import (
    ControlPlan,
    ControllerFactory,
    DualControlConfig,
    dual_control_step,
    lpv_candidate,
    solve_linear_mpc,
)
from .qp import QpProblem, QpSolution, QpStatus, solve_qp

__all__ = [
    "BatteryParams",
    "Belief",
    "ConfigError",
    "ContractError",
    "ControlPlan",
    "ControllerFactory",
    "CostSpec",
    "DomainError",
    "DualControlConfig",
    "DualControlError",
    "ExperimentConfig",
    "InfeasibleProblemError",
    "McSummary",
    "NumericalError",
    "OcvCurve",
    "QpProblem",
    "QpSolution",
    "QpStatus",
    "RunFailedError",
    "RunRecord",
    "SurrogateRollout",
    "SystemModel",
    "TrueState",
    "conditional_stage_cost",
    "dual_control_step",
    "ekf_measurement_update",
    "ekf_time_update",
    "load_config",
    "lpv_candidate",
    "observe",
    "ocv_eval",
    "ocv_slope",
    "prediction_only_rollout",
    "realized_cost",
    "reference_config",
    "reference_system_model",
    "run_closed_loop",
    "run_monte_carlo",
    "solve_linear_mpc",
    "solve_qp",
    "stage_cost_sample",
    "step_truth",
    "surrogate_cost",
]
