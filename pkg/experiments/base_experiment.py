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
Base abstract class for experiments.

Every CLI subcommand is one Experiment: it validates its RunConfig on
construction and produces an OutputRecord when run.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import click

from config import BLAB_OUTPUT_DIR, BLAB_SEED
from dispersion import DispersionParams
from errors import ValidationError
from reporting import OutputRecord


@dataclass
class RunConfig:
    """Configuration for one experiment run."""
    subcommand: str
    params: Dict[str, Any] = field(default_factory=dict)
    out_dir: Path = Path(BLAB_OUTPUT_DIR)
    seed: int = BLAB_SEED
    threads: Optional[int] = None

    def get(self, name: str, default: Any = None) -> Any:
        return self.params.get(name, default)

    def echo(self) -> Dict[str, Any]:
        """Config as recorded in the JSON summary."""
        return {'subcommand': self.subcommand, 'seed': self.seed, 'threads': self.threads,
                **self.params}


class Experiment(ABC):
    """
    Abstract base class for experiments.

    Subclasses implement ``_validate_config`` and ``run``; extra artifacts
    (snapshots) are written by ``run`` itself under ``config.out_dir``.
    """

    def __init__(self, config: RunConfig):
        """
        Initialize the experiment with its configuration.

        Args:
            config: Run configuration built by the CLI

        Raises:
            ValidationError: If the configuration is invalid
        """
        self.config = config
        self._validate_config()

    @abstractmethod
    def _validate_config(self) -> None:
        """
        Validate the run configuration.

        Raises:
            ValidationError: If a parameter violates a module precondition
        """
        pass

    @abstractmethod
    def run(self) -> OutputRecord:
        """Carry out the experiment and return its rows and summary."""
        pass

    def dispersion(self) -> DispersionParams:
        return DispersionParams(
            alpha=float(self.config.get('alpha', 0.0)),
            beta=float(self.config.get('beta', 1.0)),
            gamma=float(self.config.get('gamma', 0.0)),
        )

    def flag(self, name: str, default: bool) -> bool:
        """Boolean option read the way click reads flag values (true/false, yes/no, 1/0, on/off)."""
        value = self.config.get(name, default)
        try:
            return click.BOOL.convert(value, None, None)
        except click.BadParameter:
            raise ValidationError(f"{name} must be a boolean, got {value!r}") from None

    def require_positive(self, *names: str) -> None:
        for name in names:
            value = self.config.get(name)
            if value is None or not value > 0:
                raise ValidationError(f"{name} must be positive, got {value}")

    def record(self, header: Sequence[str], rows: List[Sequence[Any]], results: Dict[str, Any],
               sort_columns: int = 0) -> OutputRecord:
        return OutputRecord(
            subcommand=self.config.subcommand,
            header=list(header),
            rows=rows,
            results=results,
            config=self.config.echo(),
            sort_columns=sort_columns,
        )


def parse_floats(text: Any, name: str) -> List[float]:
    """Comma- or space-separated numbers, as given on the command line or in a config file."""
    if isinstance(text, (list, tuple)):
        items = list(text)
    else:
        items = [part for part in str(text).replace(',', ' ').split() if part]
    try:
        values = [float(v) for v in items]
    except ValueError:
        raise ValidationError(f"{name} must be a list of numbers, got {text!r}") from None
    if not values:
        raise ValidationError(f"{name} must not be empty")
    return values
