# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Tests for condensing, linear MPC and LPV candidates."""

import numpy as np
import pytest

from soc_dual_control.cost.functional import CostSpec, surrogate_cost
from soc_dual_control.errors import ContractError
from soc_dual_control.estimator.ekf import Belief
from soc_dual_control.estimator.rollout import prediction_only_rollout
from soc_dual_control.model.defaults import (
    flat_curve,
    identity_curve,
    mid_plateau_curve,
    reference_system_model,
    steep_ends_curve,
    uniform_model,
)
from soc_dual_control.mpc.condensed import build_condensed_problem, prediction_matrix
from soc_dual_control.mpc.dual import DualControlConfig, covariance_gradient, lpv_candidate
from soc_dual_control.mpc.linear import ControlPlan, solve_linear_mpc


def _cost(
    n: int,
    c0: float = 1.0,
    r_diag: float = 0.1,
    reference: float = 1.0,
    horizon: int = 4,
) -> CostSpec:
    return CostSpec(
        c=1.0,
        c0=c0,
        q_cap=np.ones(n),
        r_weight=r_diag * np.eye(n),
        reference=reference,
        horizon=horizon,
    )


class TestCondensedProblem:
    """Test cases for the condensed QP."""

    def test_prediction_matrix(self) -> None:
        """Test S maps inputs to states with a one-step delay."""
        matrix = prediction_matrix(np.array([0.5, 2.0]), 2)
        states = matrix @ np.array([1.0, 1.0, 1.0, 1.0, 1.0, 1.0])
        np.testing.assert_allclose(states, [0.0, 0.0, 0.5, 2.0, 1.0, 4.0])

    def test_value_matches_stage_sum(self) -> None:
        """Test the condensed objective equals the summed deterministic stage cost."""
        model = reference_system_model()
        cost = _cost(3, horizon=3)
        x0 = np.array([0.1, 0.2, 0.3])
        problem = build_condensed_problem(model, cost, x0)
        inputs = np.random.default_rng(0).uniform(-0.2, 0.2, size=(4, 3))

        zero_cov = Belief(x0, np.zeros((3, 3)))
        certain = model.with_noise(sigma_w=np.zeros((3, 3)))
        rollout = prediction_only_rollout(certain, zero_cov, inputs)
        assert problem.value(inputs) == pytest.approx(surrogate_cost(cost, rollout, inputs))
        np.testing.assert_allclose(problem.states(inputs), rollout.means)

    def test_rejects_x0_outside_unit_box(self) -> None:
        """Test the initial state must lie in [0, 1]."""
        with pytest.raises(ContractError, match="x0"):
            build_condensed_problem(reference_system_model(), _cost(3), np.array([0.1, 1.2, 0.3]))

    def test_rejects_dimension_mismatch(self) -> None:
        """Test cost and model must agree in size."""
        with pytest.raises(ContractError, match="sized for"):
            build_condensed_problem(reference_system_model(), _cost(2), np.zeros(3))


class TestSolveLinearMpc:
    """Test cases for solve_linear_mpc."""

    def test_scalar_matches_grid(self) -> None:
        """Test n=1, N=1 against a grid over (I_0, I_1)."""
        model = uniform_model([identity_curve()], i_min=-5.0, i_max=5.0)
        cfg = DualControlConfig(cost=_cost(1, c0=0.0, horizon=1))
        plan = solve_linear_mpc(model, [0.05], cfg)

        def objective(i0: np.ndarray, i1: np.ndarray) -> np.ndarray:
            x1 = 0.05 + i0
            return (0.05 - 1.0) ** 2 + 0.1 * i0**2 + (x1 - 1.0) ** 2 + 0.1 * i1**2

        grid = np.linspace(-2.0, 2.0, 401)
        i0, i1 = np.meshgrid(grid, grid, indexing="ij")
        values = np.where(0.05 + i0 <= 1.0, objective(i0, i1), np.inf)
        best = np.unravel_index(np.argmin(values), values.shape)

        assert objective(plan.inputs[0, 0], plan.inputs[1, 0]) <= values[best] + 1e-9
        assert abs(objective(plan.inputs[0, 0], plan.inputs[1, 0]) - values[best]) <= 1e-3
        assert plan.inputs[0, 0] == pytest.approx(0.95 / 1.1, abs=1e-5)
        assert plan.inputs[1, 0] == pytest.approx(0.0, abs=1e-5)

    def test_saturates_at_full_charge(self) -> None:
        """Test an unreachable reference drives the SOC onto its upper bound."""
        model = uniform_model([identity_curve()])
        cfg = DualControlConfig(cost=_cost(1, c0=0.0, reference=2.0, horizon=3))
        plan = solve_linear_mpc(model, [0.5], cfg)
        assert plan.predicted_means[-1, 0] == pytest.approx(1.0, abs=1e-5)
        assert np.all(plan.predicted_means <= 1.0 + 1e-6)

    def test_no_incentive_to_move(self) -> None:
        """Test a tracked reference with heavy input weights keeps the inputs at zero."""
        model = reference_system_model()
        cfg = DualControlConfig(cost=_cost(3, r_diag=100.0))
        plan = solve_linear_mpc(model, np.full(3, 1.0 / 3.0), cfg)
        np.testing.assert_allclose(plan.inputs, 0.0, atol=1e-5)

    def test_clamps_estimate(self) -> None:
        """Test an estimate outside [0, 1] is clamped instead of rejected."""
        model = reference_system_model()
        plan = solve_linear_mpc(model, np.array([-0.2, 0.3, 1.4]), DualControlConfig(cost=_cost(3)))
        np.testing.assert_allclose(plan.predicted_means[0], [0.0, 0.3, 1.0])
        assert plan.within_bounds(model)

    def test_plan_shape(self) -> None:
        """Test the plan covers N+1 steps and keeps its QP solution."""
        model = reference_system_model()
        plan = solve_linear_mpc(model, np.full(3, 0.05), DualControlConfig(cost=_cost(3, horizon=6)))
        assert plan.inputs.shape == (7, 3)
        assert plan.horizon == 6
        assert plan.qp_solution is not None
        assert plan.surrogate_value is None
        np.testing.assert_array_equal(plan.first_input, plan.inputs[0])


class TestLpvCandidate:
    """Test cases for lpv_candidate."""

    def test_zero_covariances_reproduce_linear_mpc(self) -> None:
        """Test zero frozen covariances without uniformity give the linear-MPC plan."""
        model = reference_system_model()
        cfg = DualControlConfig(cost=_cost(3, c0=0.0))
        belief = Belief(np.array([0.1, 0.2, 0.05]), np.zeros((3, 3)))
        linear = solve_linear_mpc(model, belief.mean, cfg)
        candidate = lpv_candidate(model, cfg, belief, linear, np.zeros((5, 3, 3)))
        assert candidate is not None
        np.testing.assert_allclose(candidate.inputs, linear.inputs, atol=10 * cfg.qp_tol)

    def test_symmetric_batteries_share_inputs(self) -> None:
        """Test identical batteries from a symmetric start receive identical currents."""
        model = uniform_model([steep_ends_curve(), steep_ends_curve()])
        cfg = DualControlConfig(cost=_cost(2), qp_tol=1e-8)
        belief = Belief(np.array([0.3, 0.3]), 0.2 * np.eye(2))
        linear = solve_linear_mpc(model, belief.mean, cfg)
        covs = prediction_only_rollout(model, belief, linear.inputs).covs
        candidate = lpv_candidate(model, cfg, belief, linear, covs)
        assert candidate is not None
        np.testing.assert_allclose(candidate.inputs[:, 0], candidate.inputs[:, 1], atol=1e-6)

    def test_constant_shift(self) -> None:
        """Test shifting every frozen covariance changes the value by a known constant."""
        model = uniform_model([mid_plateau_curve(), steep_ends_curve()])
        cfg = DualControlConfig(cost=_cost(2))
        belief = Belief(np.array([0.2, 0.6]), 0.3 * np.eye(2))
        linear = solve_linear_mpc(model, belief.mean, cfg)
        covs = prediction_only_rollout(model, belief, linear.inputs).covs

        base = lpv_candidate(model, cfg, belief, linear, covs)
        shifted = lpv_candidate(model, cfg, belief, linear, covs + 0.05 * np.eye(2))
        assert base is not None and shifted is not None
        # Per step: c * 0.05 * Q^T Q + c0 * 0.05 * tr(L) = 0.05 * (2 + 2)
        assert shifted.surrogate_value - base.surrogate_value == pytest.approx(5 * 0.2, abs=1e-9)
        np.testing.assert_allclose(shifted.inputs, base.inputs, atol=1e-12)

    def test_first_order_flat_equals_frozen(self) -> None:
        """Test unobservable curves give a zero covariance gradient."""
        model = uniform_model([flat_curve(), flat_curve()])
        frozen_cfg = DualControlConfig(cost=_cost(2))
        first_cfg = DualControlConfig(cost=_cost(2), linearization="first-order")
        belief = Belief(np.array([0.4, 0.5]), 0.1 * np.eye(2))
        linear = solve_linear_mpc(model, belief.mean, frozen_cfg)
        covs = prediction_only_rollout(model, belief, linear.inputs).covs

        assert not np.any(covariance_gradient(model, frozen_cfg.cost, belief, linear.inputs))
        frozen = lpv_candidate(model, frozen_cfg, belief, linear, covs)
        first = lpv_candidate(model, first_cfg, belief, linear, covs)
        assert frozen is not None and first is not None
        np.testing.assert_allclose(first.inputs, frozen.inputs, atol=1e-6)

    def test_first_order_within_bounds(self) -> None:
        """Test the first-order candidate is a valid plan."""
        model = reference_system_model()
        cfg = DualControlConfig(cost=_cost(3), linearization="first-order")
        belief = Belief(np.full(3, 0.05), 0.5 * np.eye(3))
        linear = solve_linear_mpc(model, belief.mean, cfg)
        covs = prediction_only_rollout(model, belief, linear.inputs).covs
        candidate = lpv_candidate(model, cfg, belief, linear, covs)
        assert candidate is not None
        assert candidate.within_bounds(model)
        assert np.isfinite(candidate.surrogate_value)

    def test_shape_checks(self) -> None:
        """Test nominal and covariances must span the horizon."""
        model = reference_system_model()
        cfg = DualControlConfig(cost=_cost(3))
        belief = Belief(np.full(3, 0.2), np.eye(3))
        nominal = ControlPlan(inputs=np.zeros((3, 3)), predicted_means=np.zeros((3, 3)))
        with pytest.raises(ContractError, match="Nominal"):
            lpv_candidate(model, cfg, belief, nominal, np.zeros((5, 3, 3)))


class TestDualControlConfig:
    """Test cases for DualControlConfig."""

    def test_horizon_override(self) -> None:
        """Test an explicit horizon replaces the cost horizon."""
        cfg = DualControlConfig(cost=_cost(3, horizon=8), horizon=5)
        assert cfg.cost.horizon == 5
        assert cfg.horizon == 5

    def test_default_horizon(self) -> None:
        """Test the horizon defaults to the cost horizon."""
        assert DualControlConfig(cost=_cost(3, horizon=8)).horizon == 8

    @pytest.mark.parametrize(
        ("kwargs", "match"),
        [
            ({"num_candidates": 0}, "num_candidates"),
            ({"linearization": "second-order"}, "linearization"),
            ({"workers": 0}, "workers"),
            ({"qp_tol": 0.0}, "qp_tol"),
        ],
    )
    def test_invalid(self, kwargs: dict, match: str) -> None:
        """Test invalid settings are rejected."""
        with pytest.raises(ContractError, match=match):
            DualControlConfig(cost=_cost(3), **kwargs)
