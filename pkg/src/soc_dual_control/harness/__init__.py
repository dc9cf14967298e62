# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Closed-loop simulation and the Monte Carlo experiment harness."""

from .closed_loop import RunRecord, run_closed_loop
from .config import (
    ExperimentConfig,
    load_config,
    parse_config,
    reference_config,
    reference_cost_spec,
)
from .monte_carlo import McSummary, run_monte_carlo, run_seeds, write_outputs

__all__ = [
    "ExperimentConfig",
    "McSummary",
    "RunRecord",
    "load_config",
    "parse_config",
    "reference_config",
    "reference_cost_spec",
    "run_closed_loop",
    "run_monte_carlo",
    "run_seeds",
    "write_outputs",
]
