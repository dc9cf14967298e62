# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Monte Carlo checks of the Gaussian moment identities behind the cost.

For x ~ N(mean, cov)::

    E[(Q^T x - r)^2]              = (Q^T mean - r)^2 + Q^T cov Q
    E[sum_{i<j} (x_i - x_j)^2]    = sum_{i<j} (cov_ii - 2 cov_ij + cov_jj
                                               + (mean_i - mean_j)^2)

Each check draws samples, forms the sample mean with its standard error and
compares it with the closed form.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from .functional import CostSpec, conditional_stage_cost, uniformity_matrix

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 1_000_000

# Samples are drawn in chunks to bound memory on wide states
CHUNK_SIZE = 200_000


@dataclass(frozen=True)
class MomentCheck:
    """Sample estimate of an expectation next to its closed form."""

    estimate: float
    standard_error: float
    exact: float
    samples: int

    @property
    def z_score(self) -> float:
        """Deviation of the estimate from the closed form in standard errors."""
        if self.standard_error == 0.0:
            return 0.0 if self.estimate == self.exact else float("inf")
        return abs(self.estimate - self.exact) / self.standard_error

    def within(self, standard_errors: float = 3.0) -> bool:
        """True if the estimate agrees with the closed form."""
        return self.z_score <= standard_errors


def random_gaussian_instance(
    n: int, rng: np.random.Generator, scale: float = 0.5
) -> tuple[np.ndarray, np.ndarray]:
    """Draw a random mean in [0, 1]^n and a random PSD covariance.

    Returns:
        Tuple of (mean, cov)
    """
    mean = rng.uniform(0.0, 1.0, size=n)
    factor = rng.normal(scale=scale, size=(n, n))
    return mean, factor @ factor.T


def _sample_statistic(
    mean: np.ndarray,
    cov: np.ndarray,
    statistic: Any,
    samples: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    total = 0.0
    total_sq = 0.0
    remaining = samples
    while remaining > 0:
        size = min(CHUNK_SIZE, remaining)
        draws = rng.multivariate_normal(mean, cov, size=size, method="eigh")
        values = statistic(draws)
        total += float(np.sum(values))
        total_sq += float(np.sum(values**2))
        remaining -= size

    estimate = total / samples
    variance = max(total_sq / samples - estimate**2, 0.0) * samples / (samples - 1)
    return estimate, float(np.sqrt(variance / samples))


def tracking_moment_check(
    mean: np.ndarray,
    cov: np.ndarray,
    q_cap: np.ndarray,
    r: float,
    rng: np.random.Generator,
    samples: int = DEFAULT_SAMPLES,
) -> MomentCheck:
    """Check E[(Q^T x - r)^2] against (Q^T mean - r)^2 + Q^T cov Q."""
    estimate, error = _sample_statistic(
        mean, cov, lambda x: (x @ q_cap - r) ** 2, samples, rng
    )
    exact = float((q_cap @ mean - r) ** 2 + q_cap @ cov @ q_cap)
    return MomentCheck(estimate, error, exact, samples)


def uniformity_moment_check(
    mean: np.ndarray,
    cov: np.ndarray,
    rng: np.random.Generator,
    samples: int = DEFAULT_SAMPLES,
) -> MomentCheck:
    """Check the expected pairwise squared SOC spread against its closed form."""
    n = mean.size
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

    def spread(x: np.ndarray) -> np.ndarray:
        return sum((x[:, i] - x[:, j]) ** 2 for i, j in pairs)

    estimate, error = _sample_statistic(mean, cov, spread, samples, rng)
    exact = float(
        sum(
            cov[i, i] - 2.0 * cov[i, j] + cov[j, j] + (mean[i] - mean[j]) ** 2
            for i, j in pairs
        )
    )
    return MomentCheck(estimate, error, exact, samples)


def stage_cost_moment_check(
    spec: CostSpec,
    mean: np.ndarray,
    cov: np.ndarray,
    current: np.ndarray,
    r: float,
    rng: np.random.Generator,
    samples: int = DEFAULT_SAMPLES,
) -> MomentCheck:
    """Check the sampled stage cost against :func:`conditional_stage_cost`."""
    uniformity = uniformity_matrix(spec.n)
    effort = float(current @ spec.r_weight @ current)

    def stage(x: np.ndarray) -> np.ndarray:
        tracking = spec.c * (x @ spec.q_cap - r) ** 2
        spread = spec.c0 * np.einsum("si,ij,sj->s", x, uniformity, x)
        return tracking + spread + effort

    estimate, error = _sample_statistic(mean, cov, stage, samples, rng)
    exact = conditional_stage_cost(spec, mean, cov, current, r)
    return MomentCheck(estimate, error, exact, samples)
