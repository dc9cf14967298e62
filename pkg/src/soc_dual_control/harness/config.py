# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Experiment configuration and its JSON representation."""

from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from ..cost.functional import CostSpec
from ..errors import ConfigError, ContractError
from ..estimator.ekf import Belief
from ..model.defaults import reference_system_model
from ..model.ocv import OcvCurve
from ..model.plant import BatteryParams, SystemModel
from ..mpc.dual import DEFAULT_CANDIDATES, LINEARIZATIONS, DualControlConfig
from ..qp.admm import DEFAULT_MAX_ITER, DEFAULT_TOL

logger = logging.getLogger(__name__)

ARMS = ("linear-mpc", "dual")
CONTROLLER_CHOICES = (*ARMS, "both")

DEFAULT_STEPS = 50
DEFAULT_RUNS = 100
DEFAULT_SEED = 42
DEFAULT_HORIZON = 8


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """Everything needed to reproduce a closed-loop Monte Carlo experiment.

    Attributes:
        model: Battery plant
        cost: Cost weights, reference and horizon
        x0_mean: Initial estimate x_{0|0}
        x0_cov: Initial covariance Sigma_{0|0}
        steps: T; each run has T+1 stage costs
        runs: M, runs per controller arm
        controller: ``linear-mpc``, ``dual`` or ``both``
        num_candidates: L for the dual controller
        seed: Master seed of the batch
        linearization: LPV linearization order (``frozen`` or ``first-order``)
        qp_tol: QP residual tolerance
        qp_max_iter: QP iteration budget
        candidate_workers: Threads per dual step
    """

    model: SystemModel
    cost: CostSpec
    x0_mean: np.ndarray
    x0_cov: np.ndarray
    steps: int = DEFAULT_STEPS
    runs: int = DEFAULT_RUNS
    controller: str = "both"
    num_candidates: int = DEFAULT_CANDIDATES
    seed: int = DEFAULT_SEED
    linearization: str = "frozen"
    qp_tol: float = DEFAULT_TOL
    qp_max_iter: int = DEFAULT_MAX_ITER
    candidate_workers: int = 1

    def __post_init__(self) -> None:
        n = self.model.n
        if self.cost.n != n:
            raise ContractError(
                f"Cost is sized for {self.cost.n} batteries, model has {n}"
            )
        x0_mean = np.array(self.x0_mean, dtype=float)
        x0_cov = np.array(self.x0_cov, dtype=float)
        if x0_mean.shape != (n,) or x0_cov.shape != (n, n):
            raise ContractError(
                f"Initial belief must have shapes ({n},) and ({n}, {n}), "
                f"got {x0_mean.shape} and {x0_cov.shape}"
            )
        if self.steps < 1:
            raise ContractError(f"steps must be at least 1, got {self.steps}")
        if self.runs < 1:
            raise ContractError(f"runs must be at least 1, got {self.runs}")
        if self.controller not in CONTROLLER_CHOICES:
            raise ContractError(
                f"controller must be one of {CONTROLLER_CHOICES}, got {self.controller!r}"
            )
        if self.seed < 0:
            raise ContractError(f"seed must be non-negative, got {self.seed}")
        belief = Belief(mean=x0_mean, cov=x0_cov)
        object.__setattr__(self, "x0_mean", belief.mean)
        object.__setattr__(self, "x0_cov", belief.cov)
        # Validates the remaining controller fields
        self.controller_config()

    @property
    def arms(self) -> list[str]:
        """Controller arms this experiment runs."""
        return list(ARMS) if self.controller == "both" else [self.controller]

    @property
    def horizon(self) -> int:
        """N."""
        return self.cost.horizon

    def controller_config(self) -> DualControlConfig:
        """Controller settings derived from this experiment."""
        return DualControlConfig(
            cost=self.cost,
            num_candidates=self.num_candidates,
            qp_tol=self.qp_tol,
            qp_max_iter=self.qp_max_iter,
            linearization=self.linearization,
            workers=self.candidate_workers,
        )

    def with_overrides(self, **overrides: Any) -> ExperimentConfig:
        """Copy with selected fields replaced; ``None`` values are ignored.

        ``horizon`` is accepted as a shortcut for the cost horizon.

        Raises:
            ConfigError: If an override is invalid
        """
        changes = {key: value for key, value in overrides.items() if value is not None}
        horizon = changes.pop("horizon", None)
        try:
            if horizon is not None:
                changes["cost"] = changes.get("cost", self.cost).with_horizon(horizon)
            return dataclasses.replace(self, **changes)
        except (ContractError, TypeError) as e:
            raise ConfigError(f"Invalid override: {e}") from e

    def to_dict(self) -> dict[str, Any]:
        """JSON-friendly document that :func:`parse_config` reads back."""
        reference = self.cost.reference.tolist()
        return {
            "model": {
                "dt": self.model.dt,
                "sigma_w_diag": np.diag(self.model.sigma_w).tolist(),
                "sigma_v_diag": np.diag(self.model.sigma_v).tolist(),
                "batteries": [
                    {
                        "eta": b.eta,
                        "q_nom": b.q_nom,
                        "i_min": b.i_min,
                        "i_max": b.i_max,
                        "ocv_coeffs": b.ocv.to_list(),
                    }
                    for b in self.model.batteries
                ],
            },
            "cost": {
                "c": self.cost.c,
                "c0": self.cost.c0,
                "q_cap": self.cost.q_cap.tolist(),
                "r_weight": self.cost.r_weight.tolist(),
                "reference": reference[0] if len(reference) == 1 else reference,
                "horizon": self.cost.horizon,
            },
            "experiment": {
                "x0_mean": self.x0_mean.tolist(),
                "x0_cov": self.x0_cov.tolist(),
                "steps": self.steps,
                "runs": self.runs,
                "controller": self.controller,
                "num_candidates": self.num_candidates,
                "seed": self.seed,
                "linearization": self.linearization,
                "qp_tol": self.qp_tol,
                "qp_max_iter": self.qp_max_iter,
            },
        }


def reference_cost_spec(n: int = 3, horizon: int = DEFAULT_HORIZON) -> CostSpec:
    """c = c0 = 1, Q = 1, R = 0.1 I, r = 1."""
    return CostSpec(
        c=1.0,
        c0=1.0,
        q_cap=np.ones(n),
        r_weight=0.1 * np.eye(n),
        reference=1.0,
        horizon=horizon,
    )


def reference_config() -> ExperimentConfig:
    """Three batteries starting near empty with a wide initial covariance."""
    model = reference_system_model()
    return ExperimentConfig(
        model=model,
        cost=reference_cost_spec(model.n),
        x0_mean=np.full(model.n, 0.05),
        x0_cov=0.5 * np.eye(model.n),
    )


class ConfigParser:
    """Parse experiment documents into :class:`ExperimentConfig`."""

    MODEL_KEYS = {"dt", "sigma_w_diag", "sigma_v_diag", "batteries"}
    BATTERY_KEYS = {"eta", "q_nom", "i_min", "i_max", "ocv_coeffs", "monotone_tol"}
    COST_KEYS = {"c", "c0", "q_cap", "r_weight_diag", "r_weight", "reference", "horizon"}
    EXPERIMENT_KEYS = {
        "x0_mean",
        "x0_cov_diag",
        "x0_cov",
        "steps",
        "runs",
        "controller",
        "num_candidates",
        "seed",
        "linearization",
        "qp_tol",
        "qp_max_iter",
    }

    def parse(self, document: Any) -> ExperimentConfig:
        """Parse a decoded JSON document.

        Args:
            document: Mapping with ``model``, ``cost`` and ``experiment`` sections

        Returns:
            Validated experiment configuration

        Raises:
            ConfigError: If a section or field is missing or malformed
        """
        if not isinstance(document, dict):
            raise ConfigError(f"Config must be a JSON object, got {type(document).__name__}")
        self._warn_unknown("top level", document, {"model", "cost", "experiment"})

        model = self._parse_model(self._section(document, "model"))
        cost = self._parse_cost(self._section(document, "cost"), model.n)
        return self._parse_experiment(self._section(document, "experiment"), model, cost)

    def _section(self, document: dict[str, Any], name: str) -> dict[str, Any]:
        section = document.get(name)
        if not isinstance(section, dict):
            raise ConfigError(f"Config section '{name}' is missing or not an object")
        return section

    def _warn_unknown(self, where: str, section: dict[str, Any], known: set[str]) -> None:
        for key in sorted(set(section) - known):
            logger.warning(f"Ignoring unknown config key '{key}' in {where}")

    def _field(self, section: dict[str, Any], name: str, where: str) -> Any:
        if name not in section:
            raise ConfigError(f"Missing field '{where}.{name}'")
        return section[name]

    def _number(
        self, section: dict[str, Any], name: str, where: str, default: Any = None
    ) -> float:
        value = section.get(name, default) if default is not None else self._field(
            section, name, where
        )
        if isinstance(value, bool) or not isinstance(value, int | float):
            raise ConfigError(f"Field '{where}.{name}' must be a number, got {value!r}")
        return float(value)

    def _integer(
        self, section: dict[str, Any], name: str, where: str, default: int | None = None
    ) -> int:
        value = section.get(name, default) if default is not None else self._field(
            section, name, where
        )
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"Field '{where}.{name}' must be an integer, got {value!r}")
        return value

    def _vector(
        self, value: Any, name: str, length: int | None = None
    ) -> np.ndarray:
        try:
            array = np.array(value, dtype=float)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Field '{name}' must be a list of numbers: {e}") from e
        if array.ndim != 1 or (length is not None and array.size != length):
            expected = f"{length} numbers" if length is not None else "a list of numbers"
            raise ConfigError(f"Field '{name}' must be {expected}, got {value!r}")
        if not np.all(np.isfinite(array)):
            raise ConfigError(f"Field '{name}' must be finite, got {value!r}")
        return array

    def _parse_model(self, section: dict[str, Any]) -> SystemModel:
        self._warn_unknown("model", section, self.MODEL_KEYS)
        batteries_doc = self._field(section, "batteries", "model")
        if not isinstance(batteries_doc, list) or not batteries_doc:
            raise ConfigError("Field 'model.batteries' must be a non-empty list")

        batteries = []
        for index, battery in enumerate(batteries_doc):
            where = f"model.batteries[{index}]"
            if not isinstance(battery, dict):
                raise ConfigError(f"Field '{where}' must be an object")
            self._warn_unknown(where, battery, self.BATTERY_KEYS)
            coeffs = self._vector(
                self._field(battery, "ocv_coeffs", where), f"{where}.ocv_coeffs"
            )
            try:
                curve = OcvCurve(
                    tuple(coeffs),
                    monotone_tol=self._number(battery, "monotone_tol", where, 0.0),
                )
                batteries.append(
                    BatteryParams(
                        eta=self._number(battery, "eta", where),
                        q_nom=self._number(battery, "q_nom", where),
                        i_min=self._number(battery, "i_min", where),
                        i_max=self._number(battery, "i_max", where),
                        ocv=curve,
                    )
                )
            except ContractError as e:
                raise ConfigError(f"Invalid battery '{where}': {e}") from e

        n = len(batteries)
        sigma_w = self._vector(
            self._field(section, "sigma_w_diag", "model"), "model.sigma_w_diag", n
        )
        sigma_v = self._vector(
            self._field(section, "sigma_v_diag", "model"), "model.sigma_v_diag", n
        )
        if np.any(sigma_w < 0.0):
            raise ConfigError(f"Field 'model.sigma_w_diag' must be >= 0, got {sigma_w}")
        if np.any(sigma_v <= 0.0):
            raise ConfigError(f"Field 'model.sigma_v_diag' must be > 0, got {sigma_v}")

        try:
            return SystemModel(
                batteries=tuple(batteries),
                dt=self._number(section, "dt", "model"),
                sigma_w=np.diag(sigma_w),
                sigma_v=np.diag(sigma_v),
            )
        except ContractError as e:
            raise ConfigError(f"Invalid model: {e}") from e

    def _parse_cost(self, section: dict[str, Any], n: int) -> CostSpec:
        self._warn_unknown("cost", section, self.COST_KEYS)
        if "r_weight" in section:
            try:
                r_weight = np.array(section["r_weight"], dtype=float)
            except (TypeError, ValueError) as e:
                raise ConfigError(f"Field 'cost.r_weight' must be a matrix: {e}") from e
        else:
            r_weight = np.diag(
                self._vector(
                    self._field(section, "r_weight_diag", "cost"), "cost.r_weight_diag", n
                )
            )

        reference = self._field(section, "reference", "cost")
        if isinstance(reference, list):
            reference = self._vector(reference, "cost.reference")
        elif isinstance(reference, bool) or not isinstance(reference, int | float):
            raise ConfigError(
                f"Field 'cost.reference' must be a number or a list, got {reference!r}"
            )

        try:
            return CostSpec(
                c=self._number(section, "c", "cost"),
                c0=self._number(section, "c0", "cost"),
                q_cap=self._vector(self._field(section, "q_cap", "cost"), "cost.q_cap", n),
                r_weight=r_weight,
                reference=reference,
                horizon=self._integer(section, "horizon", "cost", DEFAULT_HORIZON),
            )
        except ContractError as e:
            raise ConfigError(f"Invalid cost: {e}") from e

    def _parse_experiment(
        self, section: dict[str, Any], model: SystemModel, cost: CostSpec
    ) -> ExperimentConfig:
        self._warn_unknown("experiment", section, self.EXPERIMENT_KEYS)
        n = model.n
        x0_mean = self._vector(
            self._field(section, "x0_mean", "experiment"), "experiment.x0_mean", n
        )
        if "x0_cov" in section:
            try:
                x0_cov = np.array(section["x0_cov"], dtype=float)
            except (TypeError, ValueError) as e:
                raise ConfigError(f"Field 'experiment.x0_cov' must be a matrix: {e}") from e
        else:
            x0_cov = np.diag(
                self._vector(
                    self._field(section, "x0_cov_diag", "experiment"),
                    "experiment.x0_cov_diag",
                    n,
                )
            )

        controller = section.get("controller", "both")
        linearization = section.get("linearization", "frozen")
        if controller not in CONTROLLER_CHOICES:
            raise ConfigError(
                f"Field 'experiment.controller' must be one of {CONTROLLER_CHOICES}, "
                f"got {controller!r}"
            )
        if linearization not in LINEARIZATIONS:
            raise ConfigError(
                f"Field 'experiment.linearization' must be one of {LINEARIZATIONS}, "
                f"got {linearization!r}"
            )

        try:
            return ExperimentConfig(
                model=model,
                cost=cost,
                x0_mean=x0_mean,
                x0_cov=x0_cov,
                steps=self._integer(section, "steps", "experiment", DEFAULT_STEPS),
                runs=self._integer(section, "runs", "experiment", DEFAULT_RUNS),
                controller=controller,
                num_candidates=self._integer(
                    section, "num_candidates", "experiment", DEFAULT_CANDIDATES
                ),
                seed=self._integer(section, "seed", "experiment", DEFAULT_SEED),
                linearization=linearization,
                qp_tol=self._number(section, "qp_tol", "experiment", DEFAULT_TOL),
                qp_max_iter=self._integer(
                    section, "qp_max_iter", "experiment", DEFAULT_MAX_ITER
                ),
            )
        except ContractError as e:
            raise ConfigError(f"Invalid experiment: {e}") from e


def parse_config(document: Any) -> ExperimentConfig:
    """Parse a decoded JSON document into an :class:`ExperimentConfig`."""
    return ConfigParser().parse(document)


def load_config(path: str | Path) -> ExperimentConfig:
    """Load an experiment configuration from a JSON file.

    Raises:
        ConfigError: If the file is missing, unreadable or malformed
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise ConfigError(f"Config file not found: {path}") from e
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from e

    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Malformed JSON in {path}: {e}") from e

    logger.info(f"Loaded experiment config from {path}")
    return parse_config(document)
