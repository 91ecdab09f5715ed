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

"""Growth in N of the third Picard iterate."""

import math

from config import DEFAULT_QUAD_NODES, DEFAULT_T_EVAL
from errors import ValidationError
from illposed_probe import growth_fit

from .base_experiment import Experiment

HEADER = ['N', 'a3_norm', 'a3_norm_times_logN']


class PicardGrowthExperiment(Experiment):

    def _validate_config(self) -> None:
        self.params = self.dispersion()
        self.s = float(self.config.get('s', -1.0))
        self.n_min_exp = int(self.config.get('n_min_exp', 8))
        self.n_max_exp = int(self.config.get('n_max_exp', 12))
        self.t_eval = float(self.config.get('t_eval', DEFAULT_T_EVAL))
        self.nodes = int(self.config.get('nodes', DEFAULT_QUAD_NODES))
        if self.n_min_exp < 2:
            raise ValidationError("n_min_exp must be >= 2")
        if self.n_max_exp - self.n_min_exp < 3:
            raise ValidationError("the growth fit needs at least 4 values of N")
        if not self.t_eval > 0:
            raise ValidationError(f"t_eval must be positive, got {self.t_eval}")

    def run(self):
        n_list = [2.0 ** k for k in range(self.n_min_exp, self.n_max_exp + 1)]
        fit = growth_fit(self.s, n_list, self.params, self.t_eval, self.nodes, self.config.threads)
        rows = [[n, norm, norm * math.log(n)] for n, norm in zip(fit.n_values, fit.norms)]
        results = {
            'slope': fit.slope,
            'expected_slope': fit.expected,
            'residual': fit.residual,
            's': self.s,
            't_eval': self.t_eval,
            'nodes': self.nodes,
            'params': self.params.as_dict(),
        }
        return self.record(HEADER, rows, results, sort_columns=1)
