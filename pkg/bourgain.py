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
Sobolev and Bourgain-space norms on discrete grids.

The X_{s,b} norm weights a space-time spectrum by <xi>^s <tau - p(xi)>^b.
Evaluating it on a plain 2-D FFT would need a time step fine enough to
resolve tau ~ p(xi), which for cubic dispersion is hopeless. Instead each
spatial mode is first pulled back along the linear flow,

    w(xi, t) = exp(-i t p(xi)) u^(xi, t),

and the time transform of w is taken directly in the modulation variable
lambda = tau - p(xi). For fields close to free solutions w is slowly varying,
so modest time grids suffice.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np

from dispersion import DispersionParams, phase
from errors import ValidationError
from grid_fourier import RealField, SpatialGrid, SpectralField, fft_space, forward, ifft_space

logger = logging.getLogger(__name__)


def japanese(x: np.ndarray) -> np.ndarray:
    """<x> = (1 + x^2)^(1/2)."""
    return np.sqrt(1.0 + np.square(x))


def grid_symbol(params: DispersionParams, grid: SpatialGrid) -> np.ndarray:
    """p(xi_k) on the grid; the Nyquist mode gets 0 like every odd multiplier."""
    p = phase(params, grid.wavenumbers)
    p[grid.nyquist_mask] = 0.0
    return p


@dataclass(frozen=True)
class SpaceTimeGrid:
    """Spatial grid times nt uniform samples of [-T_w, T_w)."""
    spatial: SpatialGrid
    nt: int
    t_window: float

    def __post_init__(self):
        if self.nt < 2 or (self.nt & (self.nt - 1)):
            raise ValidationError(f"nt must be a power of two, got {self.nt}")
        if not self.t_window > 0:
            raise ValidationError(f"time window must be positive, got {self.t_window}")

    @property
    def dt(self) -> float:
        return 2.0 * self.t_window / self.nt

    @property
    def zero_index(self) -> int:
        return self.nt // 2

    @cached_property
    def times(self) -> np.ndarray:
        return -self.t_window + self.dt * np.arange(self.nt)

    @cached_property
    def temporal_indices(self) -> np.ndarray:
        m = np.fft.fftfreq(self.nt, d=1.0 / self.nt).astype(np.int64)
        m[self.nt // 2] = self.nt // 2
        return m

    @cached_property
    def modulations(self) -> np.ndarray:
        """lambda_m = pi m / T_w in FFT order."""
        return np.pi * self.temporal_indices / self.t_window


@dataclass
class SpaceTimeField:
    grid: SpaceTimeGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values)
        expected = (self.grid.nt, self.grid.spatial.n)
        if self.values.shape != expected:
            raise ValidationError(f"field has shape {self.values.shape}, grid expects {expected}")

    def slice_at(self, t: float) -> RealField:
        j = int(round((t + self.grid.t_window) / self.grid.dt))
        return RealField(self.grid.spatial, np.real(self.values[j]))

    def __add__(self, other: 'SpaceTimeField') -> 'SpaceTimeField':
        return SpaceTimeField(self.grid, self.values + other.values)

    def __sub__(self, other: 'SpaceTimeField') -> 'SpaceTimeField':
        return SpaceTimeField(self.grid, self.values - other.values)

    def scaled(self, c: complex) -> 'SpaceTimeField':
        return SpaceTimeField(self.grid, c * self.values)


@dataclass(frozen=True)
class BourgainIndex:
    s: float
    b: float


@dataclass(frozen=True)
class BumpFunction:
    """
    Smooth plateau: 1 on |t| <= inner, 0 on |t| >= outer.

    psi(t) = S(outer - |t|) / (S(outer - |t|) + S(|t| - inner)),
    S(r) = exp(-1/r) for r > 0 and 0 otherwise.
    """
    inner: float = 1.0
    outer: float = 2.0

    def __post_init__(self):
        if not 0 < self.inner < self.outer:
            raise ValidationError(f"bump needs 0 < inner < outer, got {self.inner}, {self.outer}")

    @staticmethod
    def _smooth_step(r: np.ndarray) -> np.ndarray:
        out = np.zeros_like(r, dtype=float)
        pos = r > 0
        out[pos] = np.exp(-1.0 / r[pos])
        return out

    def __call__(self, t):
        a = np.abs(np.asarray(t, dtype=float))
        up = self._smooth_step(np.atleast_1d(self.outer - a))
        down = self._smooth_step(np.atleast_1d(a - self.inner))
        value = up / (up + down)
        return value.reshape(a.shape) if a.ndim else float(value[0])


STANDARD_BUMP = BumpFunction()


def bump(t, shape: BumpFunction = STANDARD_BUMP):
    return shape(t)


def apply_time_cutoff(u: SpaceTimeField, delta: float, shape: BumpFunction = STANDARD_BUMP) -> SpaceTimeField:
    """Multiply each time slice by psi(t / delta)."""
    if not delta > 0:
        raise ValidationError(f"cutoff scale delta must be positive, got {delta}")
    weights = shape(u.grid.times / delta)
    return SpaceTimeField(u.grid, u.values * weights[:, None])


def hs_norm(f: Union[RealField, SpectralField], s: float) -> float:
    """
    (sum_k <xi_k>^{2s} |f^_k|^2 dxi / 2pi)^(1/2).

    With dxi/2pi = 1/L the s = 0 value is exactly the grid L^2 norm.
    """
    F = forward(f) if isinstance(f, RealField) else f
    weights = japanese(F.grid.wavenumbers) ** (2.0 * s)
    return float(np.sqrt(np.sum(weights * np.abs(F.coefficients) ** 2) / F.grid.box_length))


def pulled_back_spectrum(u: SpaceTimeField, params: DispersionParams) -> np.ndarray:
    """
    Space-time spectrum indexed by (lambda_m, xi_k), with lambda = tau - p(xi).

    Returns an (nt, n) complex array in FFT order on both axes.
    """
    grid = u.grid
    spatial = fft_space(u.values, grid.spatial)
    p = grid_symbol(params, grid.spatial)
    pulled = np.exp(-1j * grid.times[:, None] * p[None, :]) * spatial
    sign = np.where(grid.temporal_indices % 2 == 0, 1.0, -1.0)
    return grid.dt * sign[:, None] * np.fft.fft(pulled, axis=0)


def modulation_weights(grid: SpaceTimeGrid, idx: BourgainIndex) -> np.ndarray:
    """<xi>^{2s} <lambda>^{2b} on the pulled-back (lambda, xi) lattice."""
    return (japanese(grid.spatial.wavenumbers)[None, :] ** (2.0 * idx.s)
            * japanese(grid.modulations)[:, None] ** (2.0 * idx.b))


def xsb_norm(u: SpaceTimeField, idx: BourgainIndex, params: DispersionParams) -> float:
    """Discrete X_{s,b} norm; measure (dxi/2pi)(dlambda/2pi) = 1/(2 L T_w)."""
    spectrum = pulled_back_spectrum(u, params)
    grid = u.grid
    measure = 1.0 / (grid.spatial.box_length * 2.0 * grid.t_window)
    total = np.sum(modulation_weights(grid, idx) * np.abs(spectrum) ** 2) * measure
    return float(np.sqrt(total))


def space_time_l2(u: SpaceTimeField) -> float:
    grid = u.grid
    return float(np.sqrt(grid.spatial.dx * grid.dt * np.sum(np.abs(u.values) ** 2)))


def linear_evolution(u0: Union[RealField, SpectralField], st_grid: SpaceTimeGrid,
                     params: DispersionParams) -> SpaceTimeField:
    """Free solution W(t)u0 sampled on the space-time grid."""
    F = forward(u0) if isinstance(u0, RealField) else u0
    p = grid_symbol(params, st_grid.spatial)
    spectra = np.exp(1j * st_grid.times[:, None] * p[None, :]) * F.coefficients[None, :]
    values = ifft_space(spectra, st_grid.spatial)
    if isinstance(u0, RealField):
        values = values.real
    return SpaceTimeField(st_grid, values)
