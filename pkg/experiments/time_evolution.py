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

"""Time stepping with snapshot output and conservation monitoring."""

from pathlib import Path

import numpy as np

from errors import ValidationError
from grid_fourier import RealField, SpatialGrid, inverse, load_snapshot, save_snapshot
from solver import SolverConfig, solve, soliton

from .base_experiment import Experiment

HEADER = ['t', 'mass', 'l2', 'hamiltonian']
INITIAL_CONDITIONS = ('soliton', 'gaussian', 'file')


def initial_field(kind: str, grid: SpatialGrid, params, kappa: float = 0.5, amplitude: float = 0.1,
                  width: float = 2.0, path=None) -> RealField:
    """Initial data for ``solve`` and ``norms``."""
    if kind == 'soliton':
        return soliton(grid, kappa, params)
    if kind == 'gaussian':
        return RealField(grid, amplitude * np.exp(-(grid.points / width) ** 2))
    if kind == 'file':
        if path is None:
            raise ValidationError("--ic file needs --ic-file")
        loaded = load_snapshot(path)
        return loaded if isinstance(loaded, RealField) else inverse(loaded)
    raise ValidationError(f"unknown initial condition '{kind}'. Available: {', '.join(INITIAL_CONDITIONS)}")


class SolveExperiment(Experiment):

    def _validate_config(self) -> None:
        self.params = self.dispersion()
        self.ic = str(self.config.get('ic', 'soliton'))
        if self.ic not in INITIAL_CONDITIONS:
            raise ValidationError(f"unknown initial condition '{self.ic}'. Available: {', '.join(INITIAL_CONDITIONS)}")
        self.require_positive('dt', 'tfinal')
        if self.ic == 'file':
            self.u0 = initial_field('file', None, self.params, path=self.config.get('ic_file'))
            grid = self.u0.grid
        else:
            grid = SpatialGrid(int(self.config.get('n', 512)), float(self.config.get('box', 40.0)))
            self.u0 = initial_field(
                self.ic, grid, self.params,
                kappa=float(self.config.get('kappa', 0.5)),
                amplitude=float(self.config.get('amplitude', 0.1)),
                width=float(self.config.get('width', 2.0)),
            )
        self.cfg = SolverConfig(
            grid=grid,
            dt=float(self.config.get('dt')),
            t_final=float(self.config.get('tfinal')),
            dealias=self.flag('dealias', True),
            snapshot_stride=int(self.config.get('snapshot_stride', 100)),
        )

    def run(self):
        trajectory = solve(self.u0, self.cfg, self.params)
        snapshot_dir = Path(self.config.out_dir) / 'solve_snapshots'
        names = []
        for k, u in enumerate(trajectory.fields):
            names.append(save_snapshot(snapshot_dir / f'u_{k:05d}.blab', u).name)

        rows = [[t, r.mass, r.l2, r.hamiltonian] for t, r in zip(trajectory.times, trajectory.conservation)]
        results = {
            'params': self.params.as_dict(),
            'cfg': {'n': self.cfg.grid.n, 'box': self.cfg.grid.box_length, 'dt': self.cfg.step,
                    'steps': self.cfg.n_steps, 't_final': self.cfg.t_final,
                    'dealias': self.cfg.dealias, 'snapshot_stride': self.cfg.snapshot_stride},
            'conservation': {
                't': list(trajectory.times),
                'mass': [r.mass for r in trajectory.conservation],
                'l2': [r.l2 for r in trajectory.conservation],
                'hamiltonian': [r.hamiltonian for r in trajectory.conservation],
            },
            'drift': {q: trajectory.max_drift(q) for q in ('mass', 'l2', 'hamiltonian')},
            'snapshots': names,
        }
        if self.ic == 'soliton' and self.params.alpha == 0:
            exact = soliton(self.cfg.grid, float(self.config.get('kappa', 0.5)), self.params,
                            t=trajectory.times[-1])
            final = trajectory.fields[-1].values
            results['soliton_error'] = float(np.max(np.abs(final - exact.values)) / np.max(np.abs(exact.values)))
        return self.record(HEADER, rows, results)
