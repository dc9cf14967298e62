# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Exception hierarchy shared by all soc-dual-control modules."""

from __future__ import annotations


class DualControlError(Exception):
    """Base exception for soc-dual-control."""

    pass


class ContractError(DualControlError):
    """Exception raised when a caller violates an operation's preconditions."""

    pass


class DomainError(ContractError):
    """Exception raised when an OCV curve is evaluated outside [0, 1]."""

    pass


class NumericalError(DualControlError):
    """Exception raised when a linear-algebra solve fails."""

    pass


class InfeasibleProblemError(DualControlError):
    """Exception raised when the certainty-equivalence MPC problem is infeasible."""

    pass


class ConfigError(DualControlError):
    """Exception raised when an experiment configuration is missing or malformed."""

    pass


class RunFailedError(DualControlError):
    """Exception raised when a Monte Carlo run fails and the batch is aborted."""

    def __init__(self, run_index: int, controller: str, seed: int, cause: str) -> None:
        """Initialize run failure.

        Args:
            run_index: Index of the failing run within the batch
            controller: Controller arm that was running
            seed: Per-run seed that reproduces the failure
            cause: Description of the underlying error
        """
        super().__init__(
            f"Run {run_index} ({controller}) failed with seed {seed}: {cause}"
        )
        self.run_index = run_index
        self.controller = controller
        self.seed = seed
        self.cause = cause

    def __reduce__(self) -> tuple[type[RunFailedError], tuple[int, str, int, str]]:
        # Rebuilt from fields when raised inside a worker process
        return (
            RunFailedError,
            (self.run_index, self.controller, self.seed, self.cause),
        )
