# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Convex quadratic programming."""

from .admm import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    AdmmSolver,
    QpProblem,
    QpSolution,
    QpStatus,
    solve_qp,
)

__all__ = [
    "DEFAULT_MAX_ITER",
    "DEFAULT_TOL",
    "AdmmSolver",
    "QpProblem",
    "QpSolution",
    "QpStatus",
    "solve_qp",
]
