# SPDX-FileCopyrightText: 2025 Fuse Technical Group
#
# SPDX-License-Identifier: BSD-3-Clause

"""Factory for creating controllers by name."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ..model.plant import SystemModel
from .base import Controller, DualController, LinearMpcController
from .dual import DualControlConfig


class ControllerFactory:
    """Registry of controller implementations keyed by name."""

    _controllers: dict[str, type[Controller]] = {}

    @classmethod
    def register_controller(
        cls, name: str, controller_class: type[Controller]
    ) -> None:
        """Register a controller under a name.

        Args:
            name: Name used on the command line and in configs
            controller_class: Controller class to register
        """
        cls._controllers[name] = controller_class

    @classmethod
    def get_available_controllers(cls) -> list[str]:
        """Get list of registered controller names.

        Returns:
            Controller names in registration order
        """
        return list(cls._controllers.keys())

    @classmethod
    def create_controller(
        cls,
        name: str,
        model: SystemModel,
        config: DualControlConfig,
        rng: np.random.Generator | None = None,
    ) -> Controller:
        """Create a controller.

        Args:
            name: Registered controller name
            model: System model
            config: Controller settings
            rng: Random source (randomized controllers only)

        Returns:
            Controller instance

        Raises:
            ConfigError: If no controller is registered under ``name``
        """
        if name not in cls._controllers:
            available = cls.get_available_controllers()
            raise ConfigError(
                f"Controller '{name}' is not registered. Available controllers: {available}"
            )
        return cls._controllers[name](model, config, rng)


def _register_controllers() -> None:
    """Register the built-in controllers."""
    ControllerFactory.register_controller(LinearMpcController.name, LinearMpcController)
    ControllerFactory.register_controller(DualController.name, DualController)


_register_controllers()
