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

"""Closed-form block bounds next to numeric lower bounds of the trilinear norm."""

from config import DEFAULT_RESOLUTION
from dyadic import DyadicTriple, applicable_case, block_bound, block_norm_lower, regression_triples
from errors import ValidationError
from reporting import run_parallel

from .base_experiment import Experiment

HEADER = ['N1', 'N2', 'N3', 'H', 'L1', 'L2', 'L3', 'case', 'bound', 'numeric_lower', 'ratio']


class BlocksExperiment(Experiment):

    def _validate_config(self) -> None:
        self.params = self.dispersion()
        self.n_max_exp = int(self.config.get('n_max_exp', 4))
        self.l_max_exp = int(self.config.get('l_max_exp', 6))
        self.limit = int(self.config.get('limit', 100))
        self.resolution = int(self.config.get('resolution', DEFAULT_RESOLUTION))
        if self.n_max_exp < 0 or self.l_max_exp < 0:
            raise ValidationError("exponent ranges must be nonnegative")
        if self.limit < 1:
            raise ValidationError(f"limit must be >= 1, got {self.limit}")
        if self.resolution < 2:
            raise ValidationError(f"resolution must be >= 2, got {self.resolution}")

    def _row(self, triple: DyadicTriple) -> list:
        case = applicable_case(triple)
        bound = block_bound(triple, case, self.params).value
        lower = block_norm_lower(triple, self.params, self.resolution, seed=self.config.seed)
        return [*triple.as_row(), case.value, bound, lower, lower / bound]

    def run(self):
        triples = regression_triples(self.params, self.n_max_exp, self.l_max_exp, self.limit)
        rows = run_parallel(self._row, triples, self.config.threads)
        ratios = [row[-1] for row in rows]
        results = {
            'params': self.params.as_dict(),
            'blocks': len(rows),
            'resolution': self.resolution,
            'max_ratio': max(ratios) if ratios else None,
        }
        return self.record(HEADER, rows, results, sort_columns=7)
