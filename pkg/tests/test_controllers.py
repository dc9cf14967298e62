# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Tests for controller classes and the controller factory."""

import numpy as np
import pytest

from soc_dual_control.cost.functional import CostSpec
from soc_dual_control.errors import ConfigError
from soc_dual_control.estimator.ekf import Belief
from soc_dual_control.model.defaults import reference_system_model
from soc_dual_control.mpc.base import Controller, DualController, LinearMpcController
from soc_dual_control.mpc.dual import DualControlConfig
from soc_dual_control.mpc.factory import ControllerFactory
from soc_dual_control.mpc.linear import ControlPlan, solve_linear_mpc


def _config() -> DualControlConfig:
    cost = CostSpec(
        c=1.0, c0=1.0, q_cap=np.ones(3), r_weight=0.1 * np.eye(3), reference=1.0, horizon=3
    )
    return DualControlConfig(cost=cost, num_candidates=4)


class _IdleController(Controller):
    name = "idle"

    def plan(self, belief: Belief, k: int) -> ControlPlan:
        steps = self.config.cost.horizon + 1
        return ControlPlan(
            inputs=np.zeros((steps, self.model.n)),
            predicted_means=np.tile(belief.mean, (steps, 1)),
        )


class TestControllerFactory:
    """Test cases for ControllerFactory."""

    def test_builtin_controllers(self) -> None:
        """Test both built-in controllers are registered."""
        available = ControllerFactory.get_available_controllers()
        assert "linear-mpc" in available
        assert "dual" in available

    def test_create_by_name(self) -> None:
        """Test names map to the right classes."""
        model = reference_system_model()
        linear = ControllerFactory.create_controller("linear-mpc", model, _config())
        dual = ControllerFactory.create_controller(
            "dual", model, _config(), np.random.default_rng(0)
        )
        assert isinstance(linear, LinearMpcController)
        assert isinstance(dual, DualController)

    def test_unknown_controller(self) -> None:
        """Test an unregistered name raises ConfigError listing the options."""
        with pytest.raises(ConfigError, match="Available controllers"):
            ControllerFactory.create_controller("pid", reference_system_model(), _config())

    def test_register_custom_controller(self) -> None:
        """Test a registered controller can be created and run."""
        ControllerFactory.register_controller("idle", _IdleController)
        try:
            controller = ControllerFactory.create_controller(
                "idle", reference_system_model(), _config()
            )
            plan = controller.plan(Belief(np.full(3, 0.5), np.eye(3)), 0)
            assert not np.any(plan.first_input)
        finally:
            ControllerFactory._controllers.pop("idle", None)


class TestControllers:
    """Test cases for the built-in controllers."""

    def test_linear_controller_ignores_covariance(self) -> None:
        """Test linear MPC plans from the mean only."""
        model = reference_system_model()
        controller = LinearMpcController(model, _config())
        mean = np.array([0.1, 0.2, 0.3])
        narrow = controller.plan(Belief(mean, 0.01 * np.eye(3)), 2)
        wide = controller.plan(Belief(mean, 0.9 * np.eye(3)), 2)
        np.testing.assert_array_equal(narrow.inputs, wide.inputs)
        expected = solve_linear_mpc(model, mean, _config(), k0=2)
        np.testing.assert_array_equal(narrow.inputs, expected.inputs)

    def test_dual_controller_uses_its_rng(self) -> None:
        """Test two dual controllers seeded alike plan alike."""
        model = reference_system_model()
        belief = Belief(np.array([0.05, 0.1, 0.05]), 0.5 * np.eye(3))
        first = DualController(model, _config(), np.random.default_rng(11)).plan(belief, 0)
        second = DualController(model, _config(), np.random.default_rng(11)).plan(belief, 0)
        assert first.selected_candidate == second.selected_candidate
        np.testing.assert_array_equal(first.inputs, second.inputs)
        assert len(first.candidate_scores) == 4
