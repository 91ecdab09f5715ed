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

"""Case-1 bilinear ratios over a dyadic range of N."""

from bilinear_probe import predicted_case1_slopes, sweep_case1
from config import DEFAULT_EPS
from errors import ValidationError

from .base_experiment import Experiment

HEADER = ['N', 'ratio', 'direct_ratio', 'dual_ratio']


class BilinearSweepExperiment(Experiment):

    def _validate_config(self) -> None:
        self.params = self.dispersion()
        self.s = float(self.config.get('s', -1.0))
        self.b = float(self.config.get('b', 0.5))
        self.eps = float(self.config.get('eps', DEFAULT_EPS))
        self.n_min_exp = int(self.config.get('n_min_exp', 6))
        self.n_max_exp = int(self.config.get('n_max_exp', 10))
        if not self.eps > 0:
            raise ValidationError(f"eps must be positive, got {self.eps}")
        if not 2 <= self.n_min_exp <= self.n_max_exp:
            raise ValidationError("need 2 <= n_min_exp <= n_max_exp (N >= 4)")

    def run(self):
        n_list = [2.0 ** k for k in range(self.n_min_exp, self.n_max_exp + 1)]
        sweep = sweep_case1(self.s, self.b, n_list, self.params, self.eps, self.config.threads)
        rows = [[n, ratio, direct, dual] for n, ratio, direct, dual in zip(
            sweep.n_values, sweep.ratios, sweep.branches['direct'], sweep.branches['dual'])]
        results = {
            'slope': sweep.slope,
            'residual': sweep.residual,
            'branch': sweep.branch,
            'branch_slopes': sweep.branch_slopes,
            'predicted_slopes': predicted_case1_slopes(self.s, self.b, self.eps),
            'spread': sweep.spread(),
            's': self.s,
            'b': self.b,
            'eps': self.eps,
            'params': self.params.as_dict(),
        }
        return self.record(HEADER, rows, results, sort_columns=1)
