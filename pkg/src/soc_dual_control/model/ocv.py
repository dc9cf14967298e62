# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Polynomial OCV-SOC observation curves."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.polynomial import Polynomial

from ..errors import ContractError, DomainError

logger = logging.getLogger(__name__)

# Slack on the [0, 1] domain before an evaluation is treated as an upstream clamping bug
DOMAIN_TOLERANCE = 1e-12

# Resolution of the monotonicity check applied at construction
MONOTONE_GRID_POINTS = 1001


@dataclass(frozen=True)
class OcvCurve:
    """Open-circuit voltage as a polynomial in state of charge.

    ``coeffs[j]`` multiplies ``soc**j``, so ``OcvCurve((3.2, 0.8))`` is the line
    ``3.2 + 0.8 * soc``. A single coefficient describes a flat (unobservable) curve.

    Attributes:
        coeffs: Polynomial coefficients a_0..a_d in volts
        require_monotone: Reject curves whose slope dips below ``-monotone_tol``
            on the check grid (warn instead when False)
        monotone_tol: Allowed negative slope on the check grid
    """

    coeffs: tuple[float, ...]
    require_monotone: bool = True
    monotone_tol: float = 0.0
    _poly: Polynomial = field(init=False, repr=False, compare=False)
    _deriv: Polynomial = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        coeffs = tuple(float(a) for a in self.coeffs)
        if len(coeffs) == 0:
            raise ContractError("OCV curve needs at least one coefficient")
        if not all(np.isfinite(coeffs)):
            raise ContractError(f"OCV coefficients must be finite, got {coeffs}")
        if self.monotone_tol < 0:
            raise ContractError(
                f"monotone_tol must be non-negative, got {self.monotone_tol}"
            )

        poly = Polynomial(coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "_poly", poly)
        object.__setattr__(self, "_deriv", poly.deriv())

        grid = np.linspace(0.0, 1.0, MONOTONE_GRID_POINTS)
        min_slope = float(np.min(self._deriv(grid)))
        if min_slope < -self.monotone_tol:
            message = (
                f"OCV curve {coeffs} is not monotone on [0, 1]: "
                f"minimum slope {min_slope:.3e}"
            )
            if self.require_monotone:
                raise ContractError(message)
            logger.warning(message)

    @property
    def degree(self) -> int:
        """Polynomial degree (0 for a flat curve)."""
        return len(self.coeffs) - 1

    def value(self, soc: Any) -> Any:
        """Evaluate the curve in volts at one SOC or an array of SOCs."""
        return self._poly(_check_domain(soc))

    def slope(self, soc: Any) -> Any:
        """Evaluate dOCV/dSOC at one SOC or an array of SOCs."""
        return self._deriv(_check_domain(soc))

    def to_list(self) -> list[float]:
        """Return coefficients as a JSON-friendly list."""
        return list(self.coeffs)


def _check_domain(soc: Any) -> Any:
    values = np.asarray(soc, dtype=float)
    if np.any(~np.isfinite(values)):
        raise DomainError(f"SOC must be finite, got {soc}")
    if np.any(values < -DOMAIN_TOLERANCE) or np.any(values > 1.0 + DOMAIN_TOLERANCE):
        raise DomainError(
            f"SOC outside [0, 1]: [{values.min():.6g}, {values.max():.6g}]"
        )
    if values.ndim == 0:
        return float(values)
    return values


def ocv_eval(curve: OcvCurve, soc: float) -> float:
    """Open-circuit voltage at ``soc`` (Horner evaluation of the polynomial).

    Raises:
        DomainError: If ``soc`` lies outside [0, 1] by more than 1e-12
    """
    return float(curve.value(soc))


def ocv_slope(curve: OcvCurve, soc: float) -> float:
    """Analytic derivative of the curve at ``soc``.

    Raises:
        DomainError: If ``soc`` lies outside [0, 1] by more than 1e-12
    """
    return float(curve.slope(soc))
