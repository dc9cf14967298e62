# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Abstract base class for receding-horizon controllers."""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod

import numpy as np

from ..estimator.ekf import Belief
from ..model.plant import SystemModel
from .dual import DualControlConfig, dual_control_step
from .linear import ControlPlan, solve_linear_mpc

logger = logging.getLogger(__name__)


class Controller(ABC):
    """A controller maps the current belief to a plan over the horizon."""

    name: str = "controller"

    def __init__(
        self,
        model: SystemModel,
        config: DualControlConfig,
        rng: np.random.Generator | None = None,
    ) -> None:
        """Initialize controller.

        Args:
            model: System model the controller plans with
            config: Cost, horizon and solver settings
            rng: Random source for randomized controllers
        """
        self.model = model
        self.config = config
        self.rng = rng if rng is not None else np.random.default_rng()

    @abstractmethod
    def plan(self, belief: Belief, k: int) -> ControlPlan:
        """Plan from ``belief`` at absolute step ``k``.

        Args:
            belief: Current information state
            k: Absolute closed-loop step

        Returns:
            ControlPlan whose first input is applied
        """
        pass


class LinearMpcController(Controller):
    """Certainty-equivalence MPC that ignores the covariance."""

    name = "linear-mpc"

    def plan(self, belief: Belief, k: int) -> ControlPlan:
        return solve_linear_mpc(self.model, belief.mean, self.config, k0=k)


class DualController(Controller):
    """Randomized dual controller."""

    name = "dual"

    def plan(self, belief: Belief, k: int) -> ControlPlan:
        return dual_control_step(self.model, self.config, belief, self.rng, k0=k)
