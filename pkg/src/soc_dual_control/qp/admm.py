# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Dense operator-splitting (ADMM) solver for small convex QPs.

Problems have the form::

    minimize    1/2 u^T H u + g^T u
    subject to  A u <= b,  lower <= u <= upper

They are solved as ``l <= C u <= v`` with ``C = [I; A]``. Each iteration solves
one linear system with a cached Cholesky factor, over-relaxes, projects onto
the bounds and takes a dual ascent step. The penalty is rescaled every
``adaptive_rho_interval`` iterations, and once the iterates are close the
solver guesses the active set and polishes the point with a reduced KKT solve.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, lu_factor, lu_solve

from ..errors import ContractError, NumericalError

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 20000

DEFAULT_RHO = 0.1
DEFAULT_SIGMA = 1e-6
DEFAULT_ALPHA = 1.6
ADAPTIVE_RHO_INTERVAL = 25
ADAPTIVE_RHO_TOLERANCE = 5.0
RHO_MIN = 1e-6
RHO_MAX = 1e6
EQUALITY_RHO_SCALE = 1e3

# Residual level below which an active-set polish is attempted
POLISH_THRESHOLD = 1e-3
POLISH_DELTA = 1e-6
POLISH_REFINE_ITER = 3

INFEASIBILITY_TOL = 1e-5


class QpStatus(Enum):
    """Outcome of a QP solve."""

    OPTIMAL = "optimal"
    MAX_ITERATIONS = "max-iterations"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True, eq=False)
class QpProblem:
    """Convex QP ``min 1/2 u^T H u + g^T u  s.t.  A u <= b,  lower <= u <= upper``.

    Attributes:
        hess: H (m, m), symmetric PSD
        grad: g (m,)
        ineq_mat: A (p, m); p may be zero
        ineq_rhs: b (p,); entries may be +inf
        lower: Box lower bounds (m,); entries may be -inf
        upper: Box upper bounds (m,); entries may be +inf
    """

    hess: np.ndarray
    grad: np.ndarray
    ineq_mat: np.ndarray | None = None
    ineq_rhs: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self) -> None:
        hess = np.array(self.hess, dtype=float)
        grad = np.array(self.grad, dtype=float)
        if grad.ndim != 1:
            raise ContractError(f"grad must be a vector, got {grad.shape}")
        m = grad.size
        if hess.shape != (m, m):
            raise ContractError(f"hess must have shape ({m}, {m}), got {hess.shape}")
        if not np.all(np.isfinite(hess)) or not np.all(np.isfinite(grad)):
            raise ContractError("hess and grad must be finite")
        scale = max(1.0, float(np.max(np.abs(hess), initial=0.0)))
        if np.max(np.abs(hess - hess.T), initial=0.0) > 1e-10 * scale:
            raise ContractError("hess must be symmetric")

        if self.ineq_mat is None:
            ineq_mat = np.zeros((0, m))
            ineq_rhs = np.zeros(0)
        else:
            ineq_mat = np.array(self.ineq_mat, dtype=float).reshape(-1, m)
            ineq_rhs = np.array(self.ineq_rhs, dtype=float).reshape(-1)
        if ineq_rhs.shape != (ineq_mat.shape[0],):
            raise ContractError(
                f"ineq_rhs must have shape ({ineq_mat.shape[0]},), got {ineq_rhs.shape}"
            )
        if not np.all(np.isfinite(ineq_mat)) or np.any(np.isnan(ineq_rhs)):
            raise ContractError("ineq_mat must be finite and ineq_rhs not NaN")

        lower = np.full(m, -np.inf) if self.lower is None else np.array(self.lower, dtype=float)
        upper = np.full(m, np.inf) if self.upper is None else np.array(self.upper, dtype=float)
        if lower.shape != (m,) or upper.shape != (m,):
            raise ContractError(f"Bounds must have shape ({m},)")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)) or np.any(lower > upper):
            raise ContractError("Bounds must satisfy lower <= upper elementwise")

        for name, value in (
            ("hess", 0.5 * (hess + hess.T)),
            ("grad", grad),
            ("ineq_mat", ineq_mat),
            ("ineq_rhs", ineq_rhs),
            ("lower", lower),
            ("upper", upper),
        ):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def num_variables(self) -> int:
        """m, the number of decision variables."""
        return self.grad.size

    @property
    def num_inequalities(self) -> int:
        """p, the number of general inequality rows."""
        return self.ineq_rhs.size

    def objective(self, point: np.ndarray) -> float:
        """1/2 u^T H u + g^T u."""
        return float(0.5 * point @ self.hess @ point + self.grad @ point)

    def max_violation(self, point: np.ndarray) -> float:
        """Largest violation of any bound or inequality at ``point``."""
        violations = [
            np.max(self.lower - point, initial=0.0),
            np.max(point - self.upper, initial=0.0),
            np.max(self.ineq_mat @ point - self.ineq_rhs, initial=0.0),
        ]
        return float(max(violations))

    def stacked_constraints(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return (C, l, v) with ``C = [I; A]`` so that ``l <= C u <= v``."""
        m = self.num_variables
        constraint_mat = np.vstack([np.eye(m), self.ineq_mat])
        low = np.concatenate([self.lower, np.full(self.num_inequalities, -np.inf)])
        high = np.concatenate([self.upper, self.ineq_rhs])
        return constraint_mat, low, high


@dataclass(frozen=True, eq=False)
class QpSolution:
    """Result of a QP solve.

    Attributes:
        point: Final iterate u (m,)
        objective: Objective value at ``point``
        status: Solve outcome
        primal_residual: ||C u - z||_inf (or bound violation after polishing)
        dual_residual: ||H u + g + C^T y||_inf
        multipliers: Dual variables y for the stacked constraints [I; A]
        iterations: ADMM iterations taken
        polished: Whether the point came from the active-set polish
    """

    point: np.ndarray
    objective: float
    status: QpStatus
    primal_residual: float
    dual_residual: float
    multipliers: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0
    polished: bool = False

    @property
    def is_optimal(self) -> bool:
        """True when the solve converged."""
        return self.status is QpStatus.OPTIMAL


class AdmmSolver:
    """ADMM solver with adaptive penalty, active-set polishing and warm starts.

    One instance may be reused for many solves; per-solve workspace lives in
    local variables so an instance holds only settings.
    """

    def __init__(
        self,
        tol: float = DEFAULT_TOL,
        max_iter: int = DEFAULT_MAX_ITER,
        rho: float = DEFAULT_RHO,
        sigma: float = DEFAULT_SIGMA,
        alpha: float = DEFAULT_ALPHA,
        adaptive_rho_interval: int = ADAPTIVE_RHO_INTERVAL,
        polish: bool = True,
    ) -> None:
        """Initialize solver settings.

        Args:
            tol: Absolute tolerance on primal and dual residuals
            max_iter: Iteration budget
            rho: Initial penalty
            sigma: Proximal regularization of the x-update
            alpha: Over-relaxation factor in (0, 2)
            adaptive_rho_interval: Iterations between penalty updates
            polish: Attempt active-set polishing

        Raises:
            ContractError: If a setting is out of range
        """
        if not tol > 0:
            raise ContractError(f"tol must be positive, got {tol}")
        if max_iter < 1:
            raise ContractError(f"max_iter must be at least 1, got {max_iter}")
        if not 0.0 < alpha < 2.0:
            raise ContractError(f"alpha must lie in (0, 2), got {alpha}")
        if not rho > 0 or not sigma > 0:
            raise ContractError("rho and sigma must be positive")

        self.tol = tol
        self.max_iter = int(max_iter)
        self.rho = rho
        self.sigma = sigma
        self.alpha = alpha
        self.adaptive_rho_interval = max(1, int(adaptive_rho_interval))
        self.polish = polish

    def solve(
        self,
        problem: QpProblem,
        warm_start: QpSolution | None = None,
    ) -> QpSolution:
        """Solve ``problem``.

        Args:
            problem: The QP to solve
            warm_start: Previous solution whose point and multipliers seed the
                iterates (ignored if its dimensions do not match)

        Returns:
            QpSolution; callers decide what to do with non-optimal statuses
        """
        hess = problem.hess
        grad = problem.grad
        constraint_mat, low, high = problem.stacked_constraints()
        m = problem.num_variables

        x = np.zeros(m)
        z = np.clip(np.zeros(constraint_mat.shape[0]), low, high)
        y = np.zeros(constraint_mat.shape[0])
        if warm_start is not None and warm_start.point.shape == (m,):
            x = np.array(warm_start.point, dtype=float)
            z = np.clip(constraint_mat @ x, low, high)
            if warm_start.multipliers.shape == y.shape:
                y = np.array(warm_start.multipliers, dtype=float)

        rho = self.rho
        rho_vec = self._rho_vector(rho, low, high)
        factor = self._factor(hess, constraint_mat, rho_vec)

        prim_res = dual_res = np.inf
        for iteration in range(1, self.max_iter + 1):
            rhs = self.sigma * x - grad + constraint_mat.T @ (rho_vec * z - y)
            x_tilde = cho_solve(factor, rhs)
            z_tilde = constraint_mat @ x_tilde

            x = self.alpha * x_tilde + (1.0 - self.alpha) * x
            z_relaxed = self.alpha * z_tilde + (1.0 - self.alpha) * z
            z_next = np.clip(z_relaxed + y / rho_vec, low, high)
            y_prev = y
            y = y + rho_vec * (z_relaxed - z_next)
            z = z_next

            cx = constraint_mat @ x
            prim_res = _inf_norm(cx - z)
            dual_vec = hess @ x + grad + constraint_mat.T @ y
            dual_res = _inf_norm(dual_vec)

            if prim_res <= self.tol and dual_res <= self.tol:
                logger.debug(
                    f"ADMM converged in {iteration} iterations "
                    f"(primal {prim_res:.2e}, dual {dual_res:.2e})"
                )
                return self._finish(
                    problem, x, y, QpStatus.OPTIMAL, prim_res, dual_res, iteration
                )

            if iteration % self.adaptive_rho_interval != 0:
                continue

            if _primal_infeasible(y - y_prev, constraint_mat, low, high):
                logger.debug(f"ADMM detected primal infeasibility at iteration {iteration}")
                return QpSolution(
                    point=x,
                    objective=problem.objective(x),
                    status=QpStatus.INFEASIBLE,
                    primal_residual=prim_res,
                    dual_residual=dual_res,
                    multipliers=y,
                    iterations=iteration,
                )

            if self.polish and max(prim_res, dual_res) <= POLISH_THRESHOLD:
                polished = self._polish(problem, constraint_mat, low, high, z, y)
                if polished is not None:
                    logger.debug(f"ADMM polished solution after {iteration} iterations")
                    return QpSolution(
                        point=polished.point,
                        objective=polished.objective,
                        status=QpStatus.OPTIMAL,
                        primal_residual=polished.primal_residual,
                        dual_residual=polished.dual_residual,
                        multipliers=polished.multipliers,
                        iterations=iteration,
                        polished=True,
                    )

            new_rho = self._adapted_rho(
                rho, prim_res, dual_res, cx, z, hess @ x, constraint_mat.T @ y, grad
            )
            if new_rho is not None:
                rho = new_rho
                rho_vec = self._rho_vector(rho, low, high)
                factor = self._factor(hess, constraint_mat, rho_vec)

        logger.debug(
            f"ADMM hit max_iter={self.max_iter} "
            f"(primal {prim_res:.2e}, dual {dual_res:.2e})"
        )
        return self._finish(
            problem, x, y, QpStatus.MAX_ITERATIONS, prim_res, dual_res, self.max_iter
        )

    def _finish(
        self,
        problem: QpProblem,
        x: np.ndarray,
        y: np.ndarray,
        status: QpStatus,
        prim_res: float,
        dual_res: float,
        iterations: int,
    ) -> QpSolution:
        return QpSolution(
            point=x,
            objective=problem.objective(x),
            status=status,
            primal_residual=prim_res,
            dual_residual=dual_res,
            multipliers=y,
            iterations=iterations,
        )

    def _rho_vector(self, rho: float, low: np.ndarray, high: np.ndarray) -> np.ndarray:
        rho_vec = np.full(low.shape, rho)
        rho_vec[~np.isfinite(low) & ~np.isfinite(high)] = RHO_MIN
        rho_vec[low == high] = EQUALITY_RHO_SCALE * rho
        return rho_vec

    def _factor(
        self, hess: np.ndarray, constraint_mat: np.ndarray, rho_vec: np.ndarray
    ) -> Any:
        system = (
            hess
            + self.sigma * np.eye(hess.shape[0])
            + constraint_mat.T @ (rho_vec[:, None] * constraint_mat)
        )
        try:
            return cho_factor(system)
        except LinAlgError as e:
            raise NumericalError(f"ADMM linear system could not be factored: {e}") from e

    def _adapted_rho(
        self,
        base: float,
        prim_res: float,
        dual_res: float,
        cx: np.ndarray,
        z: np.ndarray,
        hx: np.ndarray,
        cty: np.ndarray,
        grad: np.ndarray,
    ) -> float | None:
        """Rescaled base penalty, or None when the change is not worth a refactor."""
        prim_scale = max(_inf_norm(cx), _inf_norm(z), 1e-10)
        dual_scale = max(_inf_norm(hx), _inf_norm(cty), _inf_norm(grad), 1e-10)
        rel_prim = prim_res / prim_scale
        rel_dual = dual_res / dual_scale
        if rel_dual <= 0.0:
            return None

        proposed = float(np.clip(base * np.sqrt(rel_prim / rel_dual), RHO_MIN, RHO_MAX))
        if (
            proposed > ADAPTIVE_RHO_TOLERANCE * base
            or proposed < base / ADAPTIVE_RHO_TOLERANCE
        ):
            logger.debug(f"ADMM rho update {base:.3e} -> {proposed:.3e}")
            return proposed
        return None

    def _polish(
        self,
        problem: QpProblem,
        constraint_mat: np.ndarray,
        low: np.ndarray,
        high: np.ndarray,
        z: np.ndarray,
        y: np.ndarray,
    ) -> QpSolution | None:
        """Solve the equality-constrained QP on the guessed active set.

        Returns:
            The polished solution, or None if it fails the tolerance or sign checks
        """
        m = problem.num_variables
        lower_active = np.flatnonzero(z - low < -y)
        upper_active = np.flatnonzero(high - z < y)
        active = np.concatenate([lower_active, upper_active])
        reduced = constraint_mat[active]
        rhs = np.concatenate([-problem.grad, low[lower_active], high[upper_active]])

        k = active.size
        kkt = np.block(
            [
                [problem.hess, reduced.T],
                [reduced, np.zeros((k, k))],
            ]
        )
        regularized = kkt + np.diag(
            np.concatenate([np.full(m, POLISH_DELTA), np.full(k, -POLISH_DELTA)])
        )
        try:
            factor = lu_factor(regularized, check_finite=True)
        except (LinAlgError, ValueError):
            return None

        solution = lu_solve(factor, rhs)
        for _ in range(POLISH_REFINE_ITER):
            solution = solution + lu_solve(factor, rhs - kkt @ solution)
        if not np.all(np.isfinite(solution)):
            return None

        point = solution[:m]
        reduced_y = solution[m:]
        multipliers = np.zeros_like(y)
        multipliers[active] = reduced_y

        if np.any(reduced_y[: lower_active.size] > self.tol) or np.any(
            reduced_y[lower_active.size :] < -self.tol
        ):
            return None

        cx = constraint_mat @ point
        prim_res = _inf_norm(np.maximum(low - cx, 0.0) + np.maximum(cx - high, 0.0))
        dual_res = _inf_norm(
            problem.hess @ point + problem.grad + constraint_mat.T @ multipliers
        )
        if prim_res > self.tol or dual_res > self.tol:
            return None

        return QpSolution(
            point=point,
            objective=problem.objective(point),
            status=QpStatus.OPTIMAL,
            primal_residual=prim_res,
            dual_residual=dual_res,
            multipliers=multipliers,
            polished=True,
        )


def _inf_norm(vector: np.ndarray) -> float:
    return float(np.max(np.abs(vector), initial=0.0))


def _primal_infeasible(
    delta_y: np.ndarray,
    constraint_mat: np.ndarray,
    low: np.ndarray,
    high: np.ndarray,
    eps: float = INFEASIBILITY_TOL,
) -> bool:
    """Farkas-type certificate on the change of the dual iterate.

    ``v = delta_y / ||delta_y||`` certifies infeasibility when ``C^T v ~ 0`` and
    ``v^T`` picks the upper bounds for positive entries and the lower bounds
    for negative ones with a negative total. Infinite bounds may only carry
    negligible weight.
    """
    norm = _inf_norm(delta_y)
    if norm <= eps:
        return False
    v = delta_y / norm
    positive = np.maximum(v, 0.0)
    negative = np.minimum(v, 0.0)

    if np.any((positive > eps) & ~np.isfinite(high)):
        return False
    if np.any((negative < -eps) & ~np.isfinite(low)):
        return False

    support = float(
        np.where(np.isfinite(high), high, 0.0) @ positive
        + np.where(np.isfinite(low), low, 0.0) @ negative
    )
    if support >= -eps:
        return False
    return _inf_norm(constraint_mat.T @ v) < eps


def solve_qp(
    problem: QpProblem,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    warm_start: QpSolution | None = None,
) -> QpSolution:
    """Solve a convex QP with a fresh :class:`AdmmSolver`.

    Args:
        problem: The QP to solve
        tol: Absolute residual tolerance
        max_iter: Iteration budget
        warm_start: Optional previous solution to start from

    Returns:
        QpSolution with status optimal, max-iterations or infeasible
    """
    return AdmmSolver(tol=tol, max_iter=max_iter).solve(problem, warm_start=warm_start)
