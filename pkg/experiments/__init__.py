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
Experiment layer behind the command-line subcommands.

Each subcommand is an Experiment registered with the ExperimentFactory.
"""

from .base_experiment import Experiment, RunConfig, parse_floats
from .experiment_factory import ExperimentFactory
from .resonance import ResonanceExperiment
from .blocks import BlocksExperiment
from .bilinear_sweep import BilinearSweepExperiment
from .counterexample import CounterexampleExperiment
from .picard_growth import PicardGrowthExperiment
from .time_evolution import SolveExperiment
from .norms import NormsExperiment

# Register available experiments
ExperimentFactory.register_experiment('resonance', ResonanceExperiment)
ExperimentFactory.register_experiment('blocks', BlocksExperiment)
ExperimentFactory.register_experiment('bilinear-sweep', BilinearSweepExperiment)
ExperimentFactory.register_experiment('counterexample', CounterexampleExperiment)
ExperimentFactory.register_experiment('picard-growth', PicardGrowthExperiment)
ExperimentFactory.register_experiment('solve', SolveExperiment)
ExperimentFactory.register_experiment('norms', NormsExperiment)

__all__ = [
    'Experiment',
    'RunConfig',
    'parse_floats',
    'ExperimentFactory',
    'ResonanceExperiment',
    'BlocksExperiment',
    'BilinearSweepExperiment',
    'CounterexampleExperiment',
    'PicardGrowthExperiment',
    'SolveExperiment',
    'NormsExperiment',
]
