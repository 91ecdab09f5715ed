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
Case-2 counterexample: the coefficient inequality over m and, optionally,
the lattice sets A_0..A_m and R for one (N, m).
"""

from bilinear_probe import (
    Counterexample2Spec,
    case2_inequality_ratio,
    case2_region_r,
    case2_sets,
    harmonic_sequence,
    predicted_areas,
)
from errors import ValidationError

from .base_experiment import Experiment, parse_floats

HEADER = ['m', 'lhs', 'rhs', 'ratio']


class CounterexampleExperiment(Experiment):

    def _validate_config(self) -> None:
        self.params = self.dispersion()
        self.m_values = [int(m) for m in parse_floats(self.config.get('m_values', '25,100,400'), 'm_values')]
        if any(m < 1 for m in self.m_values):
            raise ValidationError("m values must be >= 1")
        self.lattice_n = self.config.get('lattice_n')
        self.lattice_m = int(self.config.get('lattice_m', 1))
        self.lattice_spec = None
        if self.lattice_n is not None:
            self.lattice_spec = Counterexample2Spec(float(self.lattice_n), self.lattice_m,
                                                    harmonic_sequence(self.lattice_m), self.params)

    def _lattice_summary(self) -> dict:
        spec = self.lattice_spec
        sets = case2_sets(spec)
        measured = {f'A_{j}': s.area() for j, s in enumerate(sets)}
        measured['R'] = case2_region_r(spec).area()
        cells = sum(s.size for s in sets)
        return {
            'N': spec.n_param,
            'm': spec.m,
            'width': spec.width,
            'measured_areas': measured,
            'predicted_areas': predicted_areas(spec),
            'cells': cells,
        }

    def run(self):
        rows = []
        for m in sorted(set(self.m_values)):
            lhs, rhs = case2_inequality_ratio(harmonic_sequence(m))
            rows.append([m, lhs, rhs, lhs / rhs])
        results = {
            'ratios': {str(row[0]): row[3] for row in rows},
            'increasing': all(a[3] < b[3] for a, b in zip(rows, rows[1:])),
        }
        if self.lattice_spec is not None:
            results['lattice'] = self._lattice_summary()
        return self.record(HEADER, rows, results, sort_columns=1)
