# Copyright 2025 Frank Sommers
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
Factory for creating experiment instances.

Subcommand names map to Experiment subclasses; the CLI looks them up here.
"""

from typing import Dict, List, Type

from .base_experiment import Experiment, RunConfig


class ExperimentFactory:
    """Factory class for creating experiment instances."""

    # Registry of available experiments
    _experiments: Dict[str, Type[Experiment]] = {}

    @classmethod
    def register_experiment(cls, name: str, experiment_class: Type[Experiment]) -> None:
        """
        Register a new experiment.

        Args:
            name: Subcommand name (e.g., "resonance", "picard-growth")
            experiment_class: The class that inherits from Experiment
        """
        cls._experiments[name.lower()] = experiment_class

    @classmethod
    def get_experiment(cls, config: RunConfig) -> Experiment:
        """
        Create the experiment named by ``config.subcommand``.

        Raises:
            ValueError: If no experiment is registered under that name
            ValidationError: If the configuration is invalid
        """
        name = config.subcommand.lower()
        if name not in cls._experiments:
            available = ", ".join(cls._experiments.keys())
            raise ValueError(
                f"Experiment '{name}' not found. "
                f"Available experiments: {available}"
            )
        return cls._experiments[name](config)

    @classmethod
    def list_experiments(cls) -> List[str]:
        return list(cls._experiments.keys())
