# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Default OCV curves and the three-battery reference plant.

The default curves are qualitative stand-ins for real chemistries. They are
monotone on [0, 1] and differ mainly in where the slope (and therefore the
observability of SOC from voltage) is concentrated.
"""

from __future__ import annotations

import numpy as np

from .ocv import OcvCurve
from .plant import BatteryParams, SystemModel

# Slope 1 + 0.4 s: nearly linear, well observable everywhere (3.0 V to 4.2 V)
NEAR_LINEAR_COEFFS = (3.0, 1.0, 0.2)

# Slope 0.15 + 16 (s - 0.35)^4: LTO-like plateau over roughly [0.1, 0.6] at 5% of
# the peak slope, informative only near full charge
MID_PLATEAU_COEFFS = (2.4, 0.3901, -1.372, 3.92, -5.6, 3.2)

# Slope 0.05 + 3 (2 s - 1)^4: steep at both ends, nearly flat over [0.3, 0.7]
STEEP_ENDS_COEFFS = (3.4, 3.05, -12.0, 24.0, -24.0, 9.6)

# Slope 20 s^4: almost flat below ~0.3, steep near full charge
FLAT_THEN_STEEP_COEFFS = (3.0, 0.0, 0.0, 0.0, 0.0, 4.0)

DEFAULT_ETA = 1.0
DEFAULT_Q_NOM = 1.0
DEFAULT_I_MIN = -1.0
DEFAULT_I_MAX = 1.0
DEFAULT_DT = 1.0
DEFAULT_NOISE_VARIANCE = 0.1


def near_linear_curve() -> OcvCurve:
    """Nearly linear curve with a uniformly informative slope."""
    return OcvCurve(NEAR_LINEAR_COEFFS)


def mid_plateau_curve() -> OcvCurve:
    """S-shaped curve with a mid-range plateau (LTO-like)."""
    return OcvCurve(MID_PLATEAU_COEFFS)


def steep_ends_curve() -> OcvCurve:
    """Curve that is steep near empty and full and shallow in between."""
    return OcvCurve(STEEP_ENDS_COEFFS)


def flat_then_steep_curve() -> OcvCurve:
    """Curve that only becomes informative at high SOC."""
    return OcvCurve(FLAT_THEN_STEEP_COEFFS)


def identity_curve() -> OcvCurve:
    """h(s) = s, the linear observation used by Kalman-filter oracles."""
    return OcvCurve((0.0, 1.0))


def flat_curve(voltage: float = 3.6) -> OcvCurve:
    """Constant voltage: SOC is unobservable from the measurement."""
    return OcvCurve((voltage,))


def default_curves() -> list[OcvCurve]:
    """The three qualitatively distinct default curves, in battery order."""
    return [near_linear_curve(), mid_plateau_curve(), steep_ends_curve()]


def uniform_model(
    curves: list[OcvCurve],
    *,
    eta: float = DEFAULT_ETA,
    q_nom: float = DEFAULT_Q_NOM,
    i_min: float = DEFAULT_I_MIN,
    i_max: float = DEFAULT_I_MAX,
    dt: float = DEFAULT_DT,
    sigma_w: float = DEFAULT_NOISE_VARIANCE,
    sigma_v: float = DEFAULT_NOISE_VARIANCE,
) -> SystemModel:
    """Build a model of identical batteries that differ only in their curves.

    Args:
        curves: One OCV curve per battery
        eta: Coulombic efficiency shared by all batteries
        q_nom: Nominal capacity shared by all batteries
        i_min: Lower current bound shared by all batteries
        i_max: Upper current bound shared by all batteries
        dt: Sampling time
        sigma_w: Process-noise variance per battery
        sigma_v: Measurement-noise variance per battery

    Returns:
        SystemModel with diagonal noise covariances sigma_w * I and sigma_v * I
    """
    n = len(curves)
    batteries = tuple(
        BatteryParams(eta=eta, q_nom=q_nom, i_min=i_min, i_max=i_max, ocv=curve)
        for curve in curves
    )
    return SystemModel(
        batteries=batteries,
        dt=dt,
        sigma_w=sigma_w * np.eye(n),
        sigma_v=sigma_v * np.eye(n),
    )


def reference_system_model() -> SystemModel:
    """Three-battery reference plant: g = 1, currents in [-1, 1], W = V = 0.1 I."""
    return uniform_model(default_curves())
