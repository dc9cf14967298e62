# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Tests for the ADMM QP solver."""

import numpy as np
import pytest

from soc_dual_control.errors import ContractError
from soc_dual_control.qp.admm import AdmmSolver, QpProblem, QpStatus, solve_qp

GRID = np.linspace(-1.0, 1.0, 201)


def _grid_minimum(problem: QpProblem) -> float:
    """Smallest objective over feasible points of a 201 x 201 grid on [-1, 1]^2."""
    u1, u2 = np.meshgrid(GRID, GRID, indexing="ij")
    points = np.stack([u1.ravel(), u2.ravel()], axis=1)
    values = 0.5 * np.einsum("si,ij,sj->s", points, problem.hess, points) + points @ problem.grad
    feasible = np.all(points @ problem.ineq_mat.T <= problem.ineq_rhs + 1e-12, axis=1)
    return float(np.min(values[feasible]))


def _random_hessian(rng: np.random.Generator) -> np.ndarray:
    factor = rng.normal(size=(2, 2))
    hess = factor @ factor.T
    # Keep curvature bounded so the grid spacing resolves the minimum
    return hess / max(1.0, float(np.max(np.linalg.eigvalsh(hess))) / 2.0)


class TestQpProblem:
    """Test cases for QpProblem validation."""

    def test_rejects_asymmetric_hessian(self) -> None:
        """Test H must be symmetric."""
        with pytest.raises(ContractError, match="symmetric"):
            QpProblem(hess=np.array([[1.0, 1.0], [0.0, 1.0]]), grad=np.zeros(2))

    def test_rejects_crossed_bounds(self) -> None:
        """Test lower bounds above upper bounds."""
        with pytest.raises(ContractError, match="lower <= upper"):
            QpProblem(hess=np.eye(1), grad=np.zeros(1), lower=[1.0], upper=[0.0])

    def test_rejects_mismatched_rhs(self) -> None:
        """Test the inequality right-hand side must match the rows."""
        with pytest.raises(ContractError, match="ineq_rhs"):
            QpProblem(hess=np.eye(2), grad=np.zeros(2), ineq_mat=np.ones((2, 2)), ineq_rhs=[1.0])

    def test_max_violation(self) -> None:
        """Test the largest bound or inequality violation."""
        problem = QpProblem(
            hess=np.eye(2),
            grad=np.zeros(2),
            ineq_mat=[[1.0, 1.0]],
            ineq_rhs=[1.0],
            lower=[-1.0, -1.0],
            upper=[1.0, 1.0],
        )
        assert problem.max_violation(np.array([0.9, 0.9])) == pytest.approx(0.8)
        assert problem.max_violation(np.array([0.0, -1.5])) == pytest.approx(0.5)
        assert problem.max_violation(np.array([0.2, 0.3])) == 0.0


class TestSolveQp:
    """Test cases for solve_qp."""

    def test_interior_minimum(self) -> None:
        """Test H = I, g = 0 on a box is solved at the origin."""
        problem = QpProblem(hess=np.eye(2), grad=np.zeros(2), lower=[-1, -1], upper=[1, 1])
        solution = solve_qp(problem)
        assert solution.is_optimal
        np.testing.assert_allclose(solution.point, [0.0, 0.0], atol=1e-6)
        assert solution.objective == pytest.approx(0.0, abs=1e-10)

    def test_active_bound(self) -> None:
        """Test the unconstrained minimizer 4 is clipped to the bound 1."""
        problem = QpProblem(hess=np.eye(1), grad=[-4.0], upper=[1.0])
        solution = solve_qp(problem)
        assert solution.status is QpStatus.OPTIMAL
        assert solution.point[0] == pytest.approx(1.0, abs=1e-6)
        assert solution.multipliers[0] == pytest.approx(3.0, abs=1e-5)

    def test_active_inequality(self) -> None:
        """Test min ||u - (1, 1)||^2 subject to u1 + u2 <= 1."""
        problem = QpProblem(
            hess=2.0 * np.eye(2), grad=[-2.0, -2.0], ineq_mat=[[1.0, 1.0]], ineq_rhs=[1.0]
        )
        solution = solve_qp(problem)
        assert solution.is_optimal
        np.testing.assert_allclose(solution.point, [0.5, 0.5], atol=1e-6)

    def test_unconstrained(self) -> None:
        """Test a problem without constraints solves H u = -g."""
        hess = np.array([[2.0, 0.5], [0.5, 1.0]])
        grad = np.array([1.0, -1.0])
        solution = solve_qp(QpProblem(hess=hess, grad=grad))
        np.testing.assert_allclose(solution.point, np.linalg.solve(hess, -grad), atol=1e-6)

    def test_box_problems_match_grid(self) -> None:
        """Test 100 random box-constrained problems against grid search."""
        rng = np.random.default_rng(0)
        for _ in range(100):
            problem = QpProblem(
                hess=_random_hessian(rng),
                grad=rng.normal(size=2),
                lower=[-1.0, -1.0],
                upper=[1.0, 1.0],
            )
            solution = solve_qp(problem)
            assert solution.is_optimal
            assert problem.max_violation(solution.point) <= 1e-6
            assert abs(solution.objective - _grid_minimum(problem)) <= 1e-4

    def test_inequality_problems_beat_grid(self) -> None:
        """Test 100 random problems with an inequality row are no worse than the grid."""
        rng = np.random.default_rng(1)
        for _ in range(100):
            row = rng.normal(size=2)
            anchor = rng.uniform(-0.8, 0.8, size=2)
            problem = QpProblem(
                hess=_random_hessian(rng),
                grad=rng.normal(size=2),
                ineq_mat=row[None, :],
                ineq_rhs=[float(row @ anchor) + 0.1],
                lower=[-1.0, -1.0],
                upper=[1.0, 1.0],
            )
            solution = solve_qp(problem)
            assert solution.is_optimal
            assert problem.max_violation(solution.point) <= 1e-6
            assert solution.objective <= _grid_minimum(problem) + 1e-5

    def test_random_feasible_points_not_better(self) -> None:
        """Test no random feasible point improves on a larger solved problem."""
        rng = np.random.default_rng(2)
        factor = rng.normal(size=(6, 6))
        problem = QpProblem(
            hess=factor @ factor.T + 0.1 * np.eye(6),
            grad=rng.normal(size=6),
            ineq_mat=rng.normal(size=(4, 6)),
            ineq_rhs=np.full(4, 0.5),
            lower=np.full(6, -1.0),
            upper=np.full(6, 1.0),
        )
        solution = solve_qp(problem)
        assert solution.is_optimal
        candidates = rng.uniform(-1.0, 1.0, size=(5000, 6))
        for point in candidates:
            if problem.max_violation(point) <= 0.0:
                assert problem.objective(point) >= solution.objective - 1e-6

    def test_warm_start(self) -> None:
        """Test warm starting from the solution converges immediately to the same point."""
        rng = np.random.default_rng(3)
        factor = rng.normal(size=(5, 5))
        problem = QpProblem(
            hess=factor @ factor.T + np.eye(5),
            grad=rng.normal(size=5) * 3.0,
            lower=np.full(5, -0.5),
            upper=np.full(5, 0.5),
        )
        cold = solve_qp(problem)
        warm = solve_qp(problem, warm_start=cold)
        assert warm.is_optimal
        assert warm.iterations <= cold.iterations
        np.testing.assert_allclose(warm.point, cold.point, atol=1e-6)

    def test_warm_start_wrong_size_ignored(self) -> None:
        """Test a warm start of the wrong dimension is ignored."""
        small = solve_qp(QpProblem(hess=np.eye(1), grad=[1.0]))
        solution = solve_qp(QpProblem(hess=np.eye(2), grad=[1.0, 1.0]), warm_start=small)
        np.testing.assert_allclose(solution.point, [-1.0, -1.0], atol=1e-6)

    def test_infeasible(self) -> None:
        """Test u >= 0 together with u <= -1 is reported infeasible."""
        problem = QpProblem(
            hess=np.eye(1), grad=[0.0], ineq_mat=[[1.0]], ineq_rhs=[-1.0], lower=[0.0], upper=[1.0]
        )
        solution = solve_qp(problem)
        assert solution.status is QpStatus.INFEASIBLE
        assert not solution.is_optimal

    def test_max_iterations(self) -> None:
        """Test a tiny iteration budget is reported, not hidden."""
        problem = QpProblem(
            hess=np.array([[1.0, 0.99], [0.99, 1.0]]),
            grad=[-5.0, 3.0],
            lower=[-1.0, -1.0],
            upper=[1.0, 1.0],
        )
        solution = AdmmSolver(max_iter=2, polish=False).solve(problem)
        assert solution.status is QpStatus.MAX_ITERATIONS
        assert solution.iterations == 2


class TestAdmmSolver:
    """Test cases for AdmmSolver settings."""

    @pytest.mark.parametrize(
        ("kwargs", "match"),
        [
            ({"tol": 0.0}, "tol"),
            ({"max_iter": 0}, "max_iter"),
            ({"alpha": 2.0}, "alpha"),
            ({"rho": -1.0}, "rho"),
        ],
    )
    def test_invalid_settings(self, kwargs: dict, match: str) -> None:
        """Test invalid settings are rejected."""
        with pytest.raises(ContractError, match=match):
            AdmmSolver(**kwargs)

    def test_polish_disabled(self) -> None:
        """Test the solver converges without polishing."""
        problem = QpProblem(hess=np.eye(2), grad=[-4.0, 0.5], lower=[-1, -1], upper=[1, 1])
        solution = AdmmSolver(polish=False).solve(problem)
        assert solution.is_optimal
        assert not solution.polished
        np.testing.assert_allclose(solution.point, [1.0, -0.5], atol=1e-5)
