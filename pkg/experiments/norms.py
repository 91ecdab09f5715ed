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

"""Sobolev and Bourgain norms of sample data and the linear estimates in delta."""

from bourgain import BourgainIndex, SpaceTimeGrid, apply_time_cutoff, hs_norm, linear_evolution, xsb_norm
from config import DEFAULT_SIGMA
from errors import ValidationError
from grid_fourier import SpatialGrid
from solver import linear_estimate_probe

from .base_experiment import Experiment, parse_floats
from .time_evolution import INITIAL_CONDITIONS, initial_field

HEADER = ['delta', 'free_lhs', 'free_constant', 'duhamel_lhs', 'duhamel_constant']


class NormsExperiment(Experiment):

    def _validate_config(self) -> None:
        self.params = self.dispersion()
        self.s = float(self.config.get('s', 0.0))
        self.b = float(self.config.get('b', 0.55))
        self.sigma = float(self.config.get('sigma', DEFAULT_SIGMA))
        self.deltas = parse_floats(self.config.get('deltas', '0.5,0.25,0.125'), 'deltas')
        ic = str(self.config.get('ic', 'gaussian'))
        if ic not in INITIAL_CONDITIONS:
            raise ValidationError(f"unknown initial condition '{ic}'. Available: {', '.join(INITIAL_CONDITIONS)}")
        if ic == 'file':
            self.u0 = initial_field('file', None, self.params, path=self.config.get('ic_file'))
        else:
            grid = SpatialGrid(int(self.config.get('n', 128)), float(self.config.get('box', 40.0)))
            self.u0 = initial_field(ic, grid, self.params,
                                    kappa=float(self.config.get('kappa', 0.5)),
                                    amplitude=float(self.config.get('amplitude', 0.1)),
                                    width=float(self.config.get('width', 2.0)))
        self.st_grid = SpaceTimeGrid(self.u0.grid, int(self.config.get('nt', 1024)),
                                     float(self.config.get('t_window', 2.0)))

    def run(self):
        free = apply_time_cutoff(linear_evolution(self.u0, self.st_grid, self.params), 1.0)
        report = linear_estimate_probe(self.u0, self.deltas, self.s, self.b, self.params,
                                       st_grid=self.st_grid, sigma=self.sigma)
        rows = [[r.delta, r.free_lhs, r.free_constant, r.duhamel_lhs, r.duhamel_constant]
                for r in report.rows]
        results = {
            'hs_norm': hs_norm(self.u0, self.s),
            'xsb_norm': xsb_norm(free, BourgainIndex(self.s, self.b), self.params),
            'free_exponent': report.free_exponent,
            'expected_free_exponent': report.expected_free_exponent,
            'duhamel_exponent': report.duhamel_exponent,
            'expected_duhamel_exponent': report.expected_duhamel_exponent,
            's': self.s,
            'b': self.b,
            'b_prime': report.b_prime,
            'params': self.params.as_dict(),
        }
        return self.record(HEADER, rows, results, sort_columns=1)
