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

"""Closed-form resonance identities against direct evaluation."""

from typing import List, Sequence

import numpy as np

from dispersion import (
    DispersionParams,
    h_regions,
    lemma1_floor_sweep,
    phase,
    q_closed,
    q_regions,
    resonance_pair,
)
from errors import ValidationError
from illposed_probe import ThetaCase, theta_closed, theta_direct

from .base_experiment import Experiment

HEADER = ['family', 'region', 'samples', 'max_rel_error']


def _size(params: DispersionParams, magnitude: np.ndarray) -> np.ndarray:
    """Natural size of a cubic symbol at the given frequency magnitude."""
    return (abs(params.beta) * magnitude ** 3 + abs(params.alpha) * magnitude ** 2
            + abs(params.gamma) * magnitude + 1e-300)


def _rows(family: str, labels: Sequence[str], codes: Sequence[int], regions: np.ndarray,
          errors: np.ndarray) -> List[list]:
    rows = []
    for label, code in zip(labels, codes):
        hit = regions == code
        worst = float(errors[hit].max()) if np.any(hit) else 0.0
        rows.append([family, label, int(hit.sum()), worst])
    return rows


class ResonanceExperiment(Experiment):
    """Max scaled error of the h, q and theta closed forms over random samples."""

    def _validate_config(self) -> None:
        self.params = self.dispersion()
        self.samples = int(self.config.get('samples', 100_000))
        self.scale = float(self.config.get('scale', 100.0))
        if self.samples < 1:
            raise ValidationError(f"samples must be >= 1, got {self.samples}")
        if not self.scale > 0:
            raise ValidationError(f"scale must be positive, got {self.scale}")

    def run(self):
        p, n, scale = self.params, self.samples, self.scale
        flat = DispersionParams(p.alpha, p.beta, 0.0)
        rng = np.random.Generator(np.random.Philox(self.config.seed))
        rows = []

        a, b = rng.uniform(-scale, scale, size=(2, n))
        direct = phase(p, a) + phase(p, b) - phase(p, a + b)
        err = np.abs(resonance_pair(p, a, b) - direct) / _size(p, np.abs(a) + np.abs(b))
        rows += _rows('h', [f'H{k}' for k in range(1, 7)], range(1, 7), h_regions(a, b), err)

        xi, xi2 = rng.uniform(-scale, scale, size=(2, n))
        direct = phase(flat, xi2) + phase(flat, xi - xi2)
        err = np.abs(q_closed(p, xi, xi2) - direct) / _size(p, np.abs(xi) + np.abs(xi2))
        rows += _rows('q', [f'Q{k}' for k in range(7, 11)], range(7, 11), q_regions(xi, xi2), err)

        for case in ThetaCase:
            xi2, xi3 = -rng.uniform(0.0, scale, size=(2, n))
            if case is ThetaCase.CASE_PMMM:
                xi4 = -rng.uniform(0.0, scale, size=n)
            else:
                xi4 = rng.uniform(0.0, 1.0, size=n) * np.abs(xi2 + xi3)
            xi1 = -(xi2 + xi3 + xi4)
            direct = theta_direct(p, xi1, xi2, xi3)
            err = np.abs(theta_closed(p, xi1, xi2, xi3, case) - direct) / _size(p, np.abs(xi1))
            rows.append(['theta', case.value, n, float(err.max())])

        results = {
            'params': p.as_dict(),
            'samples': n,
            'max_rel_error': max(row[3] for row in rows),
            'lemma1_floor': lemma1_floor_sweep(p),
        }
        return self.record(HEADER, rows, results)
