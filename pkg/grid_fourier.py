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
Periodic-box discretization of the line and its Fourier transforms.

Conventions:
    x_j  = -L/2 + j L/n,                j = 0..n-1
    xi_k = 2 pi k / L,                  k in FFT order, Nyquist taken as +n/2
    f^(xi_k) = (L/n) sum_j f(x_j) exp(-i xi_k x_j)

The forward transform is a Riemann sum for the integral transform, so norms
computed from the coefficients approximate their continuum values directly.
Also home of the BLAB1 binary snapshot codec used by the CLI.
"""

import logging
import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Union

import numpy as np

from config import SNAPSHOT_MAGIC
from errors import ValidationError
from reporting import atomic_write_bytes

logger = logging.getLogger(__name__)

_HEADER = struct.Struct('<5sQdB')
_FLAG_REAL = 0
_FLAG_COMPLEX = 1


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class SpatialGrid:
    """n equispaced points on [-L/2, L/2) with periodic wrap."""
    n: int
    box_length: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 8 or not _is_power_of_two(int(self.n)):
            raise ValidationError(f"grid size must be a power of two >= 8, got {self.n}")
        if not self.box_length > 0:
            raise ValidationError(f"box length must be positive, got {self.box_length}")

    @property
    def dx(self) -> float:
        return self.box_length / self.n

    @property
    def dxi(self) -> float:
        return 2.0 * np.pi / self.box_length

    @cached_property
    def points(self) -> np.ndarray:
        return -self.box_length / 2.0 + self.dx * np.arange(self.n)

    @cached_property
    def mode_indices(self) -> np.ndarray:
        k = np.fft.fftfreq(self.n, d=1.0 / self.n).astype(np.int64)
        k[self.n // 2] = self.n // 2
        return k

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return self.dxi * self.mode_indices

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        return self.mode_indices == self.n // 2

    @cached_property
    def _shift_sign(self) -> np.ndarray:
        # exp(-i xi_k x_0) with x_0 = -L/2 is (-1)^k
        return np.where(self.mode_indices % 2 == 0, 1.0, -1.0)


@dataclass
class RealField:
    grid: SpatialGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise ValidationError(
                f"field has shape {self.values.shape}, grid expects ({self.grid.n},)"
            )


@dataclass
class SpectralField:
    grid: SpatialGrid
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=complex)
        if self.coefficients.shape != (self.grid.n,):
            raise ValidationError(
                f"coefficients have shape {self.coefficients.shape}, grid expects ({self.grid.n},)"
            )

    def hermitian_defect(self) -> float:
        """max |c(-xi) - conj(c(xi))| over non-Nyquist modes, relative to max |c|."""
        c = self.coefficients
        scale = np.max(np.abs(c))
        if scale == 0:
            return 0.0
        mirrored = np.conj(c[(-np.arange(self.grid.n)) % self.grid.n])
        keep = ~self.grid.nyquist_mask
        return float(np.max(np.abs(c - mirrored)[keep]) / scale)


def fft_space(values: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    """Forward transform along the last axis of a (..., n) array."""
    return (grid.box_length / grid.n) * grid._shift_sign * np.fft.fft(values, axis=-1)


def ifft_space(coefficients: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    """Inverse of :func:`fft_space`; returns complex samples."""
    return np.fft.ifft(coefficients * grid._shift_sign, axis=-1) * (grid.n / grid.box_length)


def forward(f: RealField) -> SpectralField:
    return SpectralField(f.grid, fft_space(f.values, f.grid))


def inverse(F: SpectralField) -> RealField:
    """Inverse transform, keeping the real part (exact for Hermitian coefficients)."""
    return RealField(F.grid, ifft_space(F.coefficients, F.grid).real)


_ORDERS = (1, 2, 3)


def derivative_multiplier(grid: SpatialGrid, order: int) -> np.ndarray:
    if order not in _ORDERS:
        raise ValidationError(f"derivative order must be one of {_ORDERS}, got {order}")
    mult = (1j * grid.wavenumbers) ** order
    if order % 2:
        mult[grid.nyquist_mask] = 0.0
    return mult


def spectral_derivative(F: SpectralField, order: int) -> SpectralField:
    """Multiply mode k by (i xi_k)^order; the Nyquist mode is dropped for odd orders."""
    return SpectralField(F.grid, F.coefficients * derivative_multiplier(F.grid, order))


def hilbert_multiplier(grid: SpatialGrid) -> np.ndarray:
    mult = -1j * np.sign(grid.wavenumbers)
    mult[grid.nyquist_mask] = 0.0
    return mult


def hilbert(F: SpectralField) -> SpectralField:
    """Hilbert transform as the multiplier -i sgn(xi), sgn(0) = 0."""
    return SpectralField(F.grid, F.coefficients * hilbert_multiplier(F.grid))


def dealias_mask(grid: SpatialGrid) -> np.ndarray:
    """True for retained modes, |k| <= n/3."""
    return 3 * np.abs(grid.mode_indices) <= grid.n


def dealias(F: SpectralField) -> SpectralField:
    return SpectralField(F.grid, np.where(dealias_mask(F.grid), F.coefficients, 0.0))


def l2_norm(f: RealField) -> float:
    return float(np.sqrt(f.grid.dx * np.sum(f.values ** 2)))


def spectral_l2_norm(F: SpectralField) -> float:
    """(1/L) sum |c_k|^2, the Parseval counterpart of :func:`l2_norm`."""
    return float(np.sqrt(np.sum(np.abs(F.coefficients) ** 2) / F.grid.box_length))


def save_snapshot(path: Union[str, Path], f: Union[RealField, SpectralField]) -> Path:
    """
    Write a field in the BLAB1 format.

    Layout: magic ``BLAB1``, uint64 n, float64 L, uint8 flag (0 real samples,
    1 complex coefficients), then little-endian doubles (real/imag interleaved
    for complex data).
    """
    if isinstance(f, RealField):
        flag, payload = _FLAG_REAL, np.ascontiguousarray(f.values, dtype='<f8')
    else:
        flag = _FLAG_COMPLEX
        payload = np.ascontiguousarray(f.coefficients.astype(np.complex128)).view('<f8')
    header = _HEADER.pack(SNAPSHOT_MAGIC, f.grid.n, f.grid.box_length, flag)
    return atomic_write_bytes(Path(path), header + payload.tobytes())


def load_snapshot(path: Union[str, Path]) -> Union[RealField, SpectralField]:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValidationError(f"{path}: too short for a BLAB1 header")
    magic, n, box_length, flag = _HEADER.unpack_from(data)
    if magic != SNAPSHOT_MAGIC:
        raise ValidationError(f"{path}: bad magic {magic!r}")
    grid = SpatialGrid(int(n), float(box_length))
    body = np.frombuffer(data, dtype='<f8', offset=_HEADER.size)
    if flag == _FLAG_REAL:
        if body.size != grid.n:
            raise ValidationError(f"{path}: expected {grid.n} doubles, found {body.size}")
        return RealField(grid, body.astype(float))
    if flag == _FLAG_COMPLEX:
        if body.size != 2 * grid.n:
            raise ValidationError(f"{path}: expected {2 * grid.n} doubles, found {body.size}")
        return SpectralField(grid, body.view(np.complex128).copy())
    raise ValidationError(f"{path}: unknown field flag {flag}")
