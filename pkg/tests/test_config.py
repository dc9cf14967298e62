# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Tests for experiment configuration parsing."""

import copy
import json
import logging
from pathlib import Path

import numpy as np
import pytest

from soc_dual_control.errors import ConfigError, ContractError
from soc_dual_control.harness.config import (
    ExperimentConfig,
    load_config,
    parse_config,
    reference_config,
)
from soc_dual_control.model.defaults import default_curves

REFERENCE_CONFIG = Path(__file__).parent.parent / "configs" / "reference.json"


def _document() -> dict:
    return json.loads(REFERENCE_CONFIG.read_text(encoding="utf-8"))


class TestLoadConfig:
    """Test cases for loading config files."""

    def test_reference_config_file(self) -> None:
        """Test the shipped config matches the built-in defaults."""
        cfg = load_config(REFERENCE_CONFIG)
        assert cfg.model.n == 3
        assert cfg.steps == 50
        assert cfg.runs == 100
        assert cfg.num_candidates == 35
        assert cfg.horizon == 8
        assert cfg.arms == ["linear-mpc", "dual"]
        np.testing.assert_allclose(cfg.x0_cov, 0.5 * np.eye(3))
        for battery, curve in zip(cfg.model.batteries, default_curves(), strict=True):
            assert battery.ocv.to_list() == pytest.approx(curve.to_list())
        assert cfg.to_dict() == reference_config().to_dict()

    def test_missing_file(self, tmp_path: Path) -> None:
        """Test a missing file names the path."""
        path = tmp_path / "nope.json"
        with pytest.raises(ConfigError, match="Config file not found"):
            load_config(path)

    def test_malformed_json(self, tmp_path: Path) -> None:
        """Test invalid JSON is reported."""
        path = tmp_path / "bad.json"
        path.write_text("{ not json", encoding="utf-8")
        with pytest.raises(ConfigError, match="Malformed JSON"):
            load_config(path)


class TestParseConfig:
    """Test cases for parse_config."""

    def test_missing_field(self) -> None:
        """Test a missing required field is named with its section."""
        document = _document()
        del document["cost"]["q_cap"]
        with pytest.raises(ConfigError, match="Missing field 'cost.q_cap'"):
            parse_config(document)

    def test_missing_section(self) -> None:
        """Test a missing section is reported."""
        document = _document()
        del document["model"]
        with pytest.raises(ConfigError, match="model"):
            parse_config(document)

    def test_unknown_key_warns(self, caplog: pytest.LogCaptureFixture) -> None:
        """Test unknown keys are ignored with a warning."""
        document = _document()
        document["experiment"]["colour"] = "blue"
        with caplog.at_level(logging.WARNING):
            cfg = parse_config(document)
        assert cfg.steps == 50
        assert "Ignoring unknown config key 'colour'" in caplog.text

    def test_measurement_noise_must_be_positive(self) -> None:
        """Test a zero measurement variance is rejected in config files."""
        document = _document()
        document["model"]["sigma_v_diag"] = [0.1, 0.0, 0.1]
        with pytest.raises(ConfigError, match="must be > 0"):
            parse_config(document)

    def test_non_monotone_curve(self) -> None:
        """Test a decreasing curve is rejected."""
        document = _document()
        document["model"]["batteries"][0]["ocv_coeffs"] = [3.6, -0.5]
        with pytest.raises(ConfigError, match="not monotone"):
            parse_config(document)

    def test_wrong_vector_length(self) -> None:
        """Test per-battery vectors must have one entry per battery."""
        document = _document()
        document["experiment"]["x0_mean"] = [0.1, 0.2]
        with pytest.raises(ConfigError, match="x0_mean"):
            parse_config(document)

    def test_boolean_is_not_a_number(self) -> None:
        """Test JSON booleans are not accepted as numbers."""
        document = _document()
        document["cost"]["c"] = True
        with pytest.raises(ConfigError, match="must be a number"):
            parse_config(document)

    def test_monotone_tol_must_be_a_number(self) -> None:
        """Test a non-numeric monotone_tol is a config error, not a crash."""
        document = _document()
        document["model"]["batteries"][1]["monotone_tol"] = "abc"
        with pytest.raises(ConfigError, match="model.batteries\\[1\\].monotone_tol' must be a number"):
            parse_config(document)

    def test_monotone_tol_relaxes_check(self) -> None:
        """Test monotone_tol admits a slightly decreasing curve."""
        document = _document()
        document["model"]["batteries"][0]["ocv_coeffs"] = [3.0, -0.001, 0.01]
        document["model"]["batteries"][0]["monotone_tol"] = 0.01
        cfg = parse_config(document)
        assert cfg.model.batteries[0].ocv.to_list() == [3.0, -0.001, 0.01]

    def test_unknown_controller(self) -> None:
        """Test the controller must be a known arm."""
        document = _document()
        document["experiment"]["controller"] = "pid"
        with pytest.raises(ConfigError, match="controller"):
            parse_config(document)

    def test_reference_sequence(self) -> None:
        """Test a list reference is accepted."""
        document = _document()
        document["cost"]["reference"] = [0.5, 0.8, 1.0]
        cfg = parse_config(document)
        np.testing.assert_allclose(cfg.cost.reference, [0.5, 0.8, 1.0])

    def test_defaults_fill_optional_fields(self) -> None:
        """Test optional experiment fields fall back to defaults."""
        document = _document()
        for key in ("steps", "runs", "num_candidates", "seed", "linearization"):
            del document["experiment"][key]
        cfg = parse_config(document)
        assert cfg.steps == 50
        assert cfg.seed == 42
        assert cfg.linearization == "frozen"

    def test_to_dict_round_trip(self) -> None:
        """Test to_dict output parses back to the same configuration."""
        cfg = reference_config().with_overrides(runs=7, seed=3)
        assert parse_config(copy.deepcopy(cfg.to_dict())).to_dict() == cfg.to_dict()


class TestExperimentConfig:
    """Test cases for ExperimentConfig."""

    def test_with_overrides(self) -> None:
        """Test overrides replace fields and None is ignored."""
        cfg = reference_config().with_overrides(runs=5, steps=None, horizon=4, controller="dual")
        assert cfg.runs == 5
        assert cfg.steps == 50
        assert cfg.horizon == 4
        assert cfg.arms == ["dual"]
        assert cfg.controller_config().horizon == 4

    def test_invalid_override(self) -> None:
        """Test invalid overrides raise ConfigError."""
        with pytest.raises(ConfigError, match="Invalid override"):
            reference_config().with_overrides(runs=0)

    def test_controller_config(self) -> None:
        """Test the controller settings follow the experiment."""
        cfg = reference_config().with_overrides(num_candidates=7, linearization="first-order")
        controller = cfg.controller_config()
        assert controller.num_candidates == 7
        assert controller.linearization == "first-order"
        assert controller.cost is cfg.cost

    def test_belief_shape_mismatch(self) -> None:
        """Test the initial belief must match the model."""
        base = reference_config()
        with pytest.raises(ContractError, match="Initial belief"):
            ExperimentConfig(
                model=base.model, cost=base.cost, x0_mean=np.zeros(2), x0_cov=np.eye(2)
            )
