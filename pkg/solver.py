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
Time integration of the Benjamin equation and the Picard/Duhamel iteration.

In Fourier variables the equation reads

    d/dt u^ = i p(xi) u^ - i xi FT(u^2),

so the linear part is integrated exactly by the propagator exp(i t p(xi)) and
only the quadratic flux is handled by the Runge-Kutta stages (integrating
factor RK4). The same propagator drives the Duhamel integral used by the
Picard iteration and the linear-estimate probe.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid

from bourgain import (
    STANDARD_BUMP,
    BourgainIndex,
    SpaceTimeField,
    SpaceTimeGrid,
    apply_time_cutoff,
    grid_symbol,
    hs_norm,
    linear_evolution,
    xsb_norm,
)
from config import BLOWUP_FACTOR, CFL_PHASE_LIMIT, DEFAULT_SIGMA
from dispersion import DispersionParams
from errors import BlowUpError, ValidationError
from grid_fourier import (
    RealField,
    SpatialGrid,
    SpectralField,
    dealias_mask,
    derivative_multiplier,
    fft_space,
    forward,
    hilbert_multiplier,
    ifft_space,
    inverse,
)

logger = logging.getLogger(__name__)


@dataclass
class SolverConfig:
    grid: SpatialGrid
    dt: float
    t_final: float
    dealias: bool = True
    snapshot_stride: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if not self.t_final > 0:
            raise ValidationError(f"t_final must be positive, got {self.t_final}")
        if self.dt > self.t_final:
            raise ValidationError(f"dt={self.dt} exceeds t_final={self.t_final}")
        if self.snapshot_stride < 1:
            raise ValidationError(f"snapshot stride must be >= 1, got {self.snapshot_stride}")

    @property
    def n_steps(self) -> int:
        return max(1, int(math.ceil(self.t_final / self.dt - 1e-9)))

    @property
    def step(self) -> float:
        """Step actually taken: t_final split into n_steps equal pieces."""
        return self.t_final / self.n_steps


@dataclass
class ConservationReport:
    mass: float
    l2: float
    hamiltonian: Optional[float] = None


@dataclass
class Trajectory:
    times: List[float] = field(default_factory=list)
    fields: List[RealField] = field(default_factory=list)
    conservation: List[ConservationReport] = field(default_factory=list)

    def append(self, t: float, u: RealField, report: ConservationReport) -> None:
        if self.times and t <= self.times[-1]:
            raise ValidationError(f"snapshot time {t} is not after {self.times[-1]}")
        self.times.append(t)
        self.fields.append(u)
        self.conservation.append(report)

    def max_drift(self, quantity: str) -> float:
        """max_t |q(t) - q(0)| / (1 + |q(0)|)."""
        values = np.array([getattr(r, quantity) for r in self.conservation], dtype=float)
        return float(np.max(np.abs(values - values[0])) / (1.0 + abs(values[0])))


def linear_propagator(params: DispersionParams, dt: float, grid: SpatialGrid) -> np.ndarray:
    """Per-mode factor exp(i dt p(xi_k)); modulus one, Nyquist mode fixed."""
    return np.exp(1j * dt * grid_symbol(params, grid))


def _nonlinear_coeffs(coeffs: np.ndarray, grid: SpatialGrid, dealias: bool = True) -> np.ndarray:
    """-i xi FT(u^2) for coefficient arrays of shape (..., n)."""
    mask = dealias_mask(grid) if dealias else None
    if mask is not None:
        coeffs = np.where(mask, coeffs, 0.0)
    u = ifft_space(coeffs, grid).real
    square = fft_space(u * u, grid)
    if mask is not None:
        square = np.where(mask, square, 0.0)
    return -derivative_multiplier(grid, 1) * square


def rhs_nonlinear(u_hat: SpectralField, dealias: bool = True) -> SpectralField:
    """Spectral flux -i xi FT(u^2), i.e. the transform of -(u^2)_x."""
    return SpectralField(u_hat.grid, _nonlinear_coeffs(u_hat.coefficients, u_hat.grid, dealias))


def _ifrk4(coeffs: np.ndarray, half: np.ndarray, full: np.ndarray, h: float,
           grid: SpatialGrid, dealias: bool) -> np.ndarray:
    nl = lambda c: h * _nonlinear_coeffs(c, grid, dealias)
    a = nl(coeffs)
    b = nl(half * (coeffs + a / 2))
    c = nl(half * coeffs + b / 2)
    d = nl(full * coeffs + half * c)
    return full * coeffs + (full * a + 2 * half * (b + c) + d) / 6


def step_ifrk4(u: RealField, cfg: SolverConfig, params: DispersionParams) -> RealField:
    """Advance one step of size ``cfg.step``."""
    half = linear_propagator(params, cfg.step / 2, u.grid)
    coeffs = _ifrk4(forward(u).coefficients, half, half * half, cfg.step, u.grid, cfg.dealias)
    return inverse(SpectralField(u.grid, coeffs))


def hamiltonian(u: RealField, params: DispersionParams) -> float:
    """
    E(u) = int (gamma/2) u^2 - (alpha/2) u H u_x + (beta/2) u_x^2 - u^3/3 dx.

    The equation is d/dt u = d/dx (dE/du), so E is conserved by smooth solutions.
    """
    grid = u.grid
    power = np.abs(forward(u).coefficients) ** 2 / grid.box_length
    hx = np.real(hilbert_multiplier(grid) * derivative_multiplier(grid, 1))  # |xi|, Nyquist 0
    xi2 = np.where(grid.nyquist_mask, 0.0, grid.wavenumbers ** 2)
    l2 = grid.dx * np.sum(u.values ** 2)
    cubic = grid.dx * np.sum(u.values ** 3)
    return float(0.5 * params.gamma * l2
                 - 0.5 * params.alpha * np.sum(hx * power)
                 + 0.5 * params.beta * np.sum(xi2 * power)
                 - cubic / 3.0)


def conservation_report(u: RealField, params: DispersionParams, coeffs: Optional[np.ndarray] = None,
                        with_hamiltonian: bool = True) -> ConservationReport:
    if coeffs is None:
        coeffs = forward(u).coefficients
    return ConservationReport(
        mass=float(coeffs[0].real),
        l2=float(u.grid.dx * np.sum(u.values ** 2)),
        hamiltonian=hamiltonian(u, params) if with_hamiltonian else None,
    )


def soliton(grid: SpatialGrid, kappa: float, params: DispersionParams, t: float = 0.0,
            x0: float = 0.0) -> RealField:
    """
    Exact solitary wave 6 beta kappa^2 sech^2(kappa (x - x0 - c t)), c = 4 beta kappa^2 - gamma.

    Only a solution when alpha = 0; the box must be wide enough that the tails
    are negligible at the periodic boundary.
    """
    if params.alpha != 0:
        raise ValidationError("the sech^2 solitary wave needs alpha = 0")
    speed = 4.0 * params.beta * kappa ** 2 - params.gamma
    z = grid.points - x0 - speed * t
    # shift into the periodic box
    z = (z + grid.box_length / 2.0) % grid.box_length - grid.box_length / 2.0
    return RealField(grid, 6.0 * params.beta * kappa ** 2 / np.cosh(kappa * z) ** 2)


def solve(u0: RealField, cfg: SolverConfig, params: DispersionParams,
          with_hamiltonian: bool = True) -> Trajectory:
    """
    Integrate from t = 0 to ``cfg.t_final``, keeping every ``snapshot_stride``-th state.

    Raises:
        ValidationError: If u0 is not finite or lives on another grid
        BlowUpError: If the state becomes non-finite or exceeds 1e6 times its
            initial maximum
    """
    grid = cfg.grid
    if u0.grid != grid:
        raise ValidationError("initial field and solver grid differ")
    if not np.all(np.isfinite(u0.values)):
        raise ValidationError("initial field contains non-finite values")

    h = cfg.step
    p = grid_symbol(params, grid)
    phase_per_step = h * float(np.max(np.abs(p)))
    if phase_per_step > CFL_PHASE_LIMIT:
        logger.warning("dt * max|p| = %.3g exceeds %.0e; only the nonlinear part limits accuracy, "
                       "but this step is unusually large", phase_per_step, CFL_PHASE_LIMIT)

    half = np.exp(0.5j * h * p)
    full = half * half
    coeffs = forward(u0).coefficients
    initial_max = float(np.max(np.abs(u0.values)))
    limit = BLOWUP_FACTOR * initial_max

    trajectory = Trajectory()
    trajectory.append(0.0, u0, conservation_report(u0, params, coeffs, with_hamiltonian))
    logger.info("solve: %d steps of %.3g on n=%d, L=%.3g", cfg.n_steps, h, grid.n, grid.box_length)

    for step in range(1, cfg.n_steps + 1):
        coeffs = _ifrk4(coeffs, half, full, h, grid, cfg.dealias)
        u = RealField(grid, ifft_space(coeffs, grid).real)
        max_abs = float(np.max(np.abs(u.values)))
        t = step * h
        if not np.isfinite(max_abs) or (initial_max > 0 and max_abs > limit):
            raise BlowUpError(f"blow-up at t={t:.6g}: max|u| = {max_abs:.3g}", t, max_abs)
        if step % cfg.snapshot_stride == 0 or step == cfg.n_steps:
            trajectory.append(t, u, conservation_report(u, params, coeffs, with_hamiltonian))
    return trajectory


# ==================== Duhamel and Picard ====================

def _duhamel_coeffs(source: np.ndarray, st_grid: SpaceTimeGrid, p: np.ndarray) -> np.ndarray:
    """
    int_0^t exp(i (t - t') p) F(t') dt' per mode, trapezoid rule in t'.

    The integrand is pulled back by exp(-i t' p) first so the quadrature sees
    only the slow part of the source.
    """
    times = st_grid.times
    z = st_grid.zero_index
    pulled = np.exp(-1j * times[:, None] * p[None, :]) * source
    integral = np.empty_like(pulled)
    integral[z:] = cumulative_trapezoid(pulled[z:], dx=st_grid.dt, axis=0, initial=0)
    backward = cumulative_trapezoid(pulled[z::-1], dx=-st_grid.dt, axis=0, initial=0)
    integral[:z + 1] = backward[::-1]
    return np.exp(1j * times[:, None] * p[None, :]) * integral


def duhamel(u_source: SpaceTimeField, params: DispersionParams) -> SpaceTimeField:
    """D(t) = int_0^t W(t - t') f(t') dt' on the source's space-time grid."""
    st_grid = u_source.grid
    p = grid_symbol(params, st_grid.spatial)
    coeffs = _duhamel_coeffs(fft_space(u_source.values, st_grid.spatial), st_grid, p)
    values = ifft_space(coeffs, st_grid.spatial)
    if not np.iscomplexobj(u_source.values):
        values = values.real
    return SpaceTimeField(st_grid, values)


@dataclass
class PicardConfig:
    delta: float
    iterations: int
    st_grid: SpaceTimeGrid

    MIN_TRANSITION_SAMPLES = 16

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValidationError(f"delta must lie in (0, 1), got {self.delta}")
        if self.iterations < 1:
            raise ValidationError(f"need at least one iteration, got {self.iterations}")
        if self.st_grid.t_window < 2 * self.delta * (1 - 1e-12):
            raise ValidationError(
                f"time window {self.st_grid.t_window} must cover [-2 delta, 2 delta] = {2 * self.delta}"
            )
        if self.delta / self.st_grid.dt < self.MIN_TRANSITION_SAMPLES:
            raise ValidationError(
                f"cutoff transition [delta, 2 delta] resolved by {self.delta / self.st_grid.dt:.1f} "
                f"samples, need {self.MIN_TRANSITION_SAMPLES}"
            )


@dataclass
class PicardResult:
    iterates: List[SpaceTimeField]
    distances: List[float]
    diverged: bool = False

    def contraction_factors(self) -> List[float]:
        d = self.distances
        return [d[k] / d[k + 1] if d[k + 1] > 0 else math.inf for k in range(len(d) - 1)]


def picard_iterate(u0: RealField, pcfg: PicardConfig, s: float, b: float,
                   params: DispersionParams) -> PicardResult:
    """
    u^0 = psi(t) W(t) u0,  u^{k+1} = psi(t) W(t) u0 - 2 psi(t/delta) Duhamel[u^k u^k_x].

    Distances are X_{s,b} norms of consecutive differences. The run is
    flagged as diverged (iterates still returned) once the distance grows
    twice in a row.
    """
    st_grid = pcfg.st_grid
    if u0.grid != st_grid.spatial:
        raise ValidationError("initial field and space-time grid differ")
    spatial = st_grid.spatial
    p = grid_symbol(params, spatial)
    idx = BourgainIndex(s, b)
    free = apply_time_cutoff(linear_evolution(u0, st_grid, params), 1.0, STANDARD_BUMP)
    cutoff = STANDARD_BUMP(st_grid.times / pcfg.delta)[:, None]

    iterates = [free]
    distances: List[float] = []
    diverged = False
    current = free
    for k in range(pcfg.iterations):
        flux = _nonlinear_coeffs(fft_space(current.values, spatial), spatial)
        correction = ifft_space(_duhamel_coeffs(flux, st_grid, p), spatial).real
        nxt = SpaceTimeField(st_grid, free.values + cutoff * correction)
        distance = xsb_norm(nxt - current, idx, params)
        distances.append(distance)
        iterates.append(nxt)
        current = nxt
        logger.debug("picard iteration %d: distance %.3e", k + 1, distance)
        if len(distances) >= 3 and distances[-1] > distances[-2] > distances[-3]:
            if not diverged:
                logger.warning("picard iteration diverging at step %d (distance %.3e)", k + 1, distance)
            diverged = True
        if not np.all(np.isfinite(nxt.values)):
            diverged = True
            logger.warning("picard iterate %d is not finite; stopping", k + 1)
            break
    return PicardResult(iterates, distances, diverged)


@dataclass
class LinearEstimateRow:
    delta: float
    free_lhs: float          # ||psi(t/delta) W u0||_{X_{s,b}}
    free_data: float         # ||u0||_{H^s}
    free_constant: float     # free_lhs / (delta^{(1-2b)/2} free_data)
    duhamel_lhs: float       # ||psi(t/delta) int_0^t W(t-t') f||_{X_{s,b}}
    duhamel_data: float      # ||f||_{X_{s,b'}}
    duhamel_constant: float  # duhamel_lhs / (delta^{1+b'-b} duhamel_data)


@dataclass
class LinearEstimateReport:
    s: float
    b: float
    b_prime: float
    rows: List[LinearEstimateRow]
    free_exponent: Optional[float]
    duhamel_exponent: Optional[float]

    @property
    def expected_free_exponent(self) -> float:
        return (1.0 - 2.0 * self.b) / 2.0

    @property
    def expected_duhamel_exponent(self) -> float:
        return 1.0 + self.b_prime - self.b


def _fit_exponent(deltas: Sequence[float], values: Sequence[float]) -> Optional[float]:
    deltas = np.asarray(deltas, dtype=float)
    values = np.asarray(values, dtype=float)
    if deltas.size < 2 or np.any(values <= 0):
        return None
    return float(np.polyfit(np.log(deltas), np.log(values), 1)[0])


def linear_estimate_probe(u0: RealField, deltas: Union[float, Sequence[float]], s: float, b: float,
                          params: DispersionParams, st_grid: Optional[SpaceTimeGrid] = None,
                          sigma: float = DEFAULT_SIGMA) -> LinearEstimateReport:
    """
    Measure both sides of the free and Duhamel linear estimates for each delta.

    The forcing for the Duhamel estimate is f = psi(t) W(t) u0. Defaults to a
    time window of [-2, 2] sampled at 1024 points.

    Raises:
        ValidationError: If b is outside (1/2, 1], sigma > 1 - b, or a delta
            does not fit in the time window
    """
    if not 0.5 < b <= 1.0:
        raise ValidationError(f"b must lie in (1/2, 1], got {b}")
    b_prime = b - 1.0 + sigma
    if not (b_prime + 1.0 >= b and b_prime <= 0.0 and b_prime > -0.5):
        raise ValidationError(f"b' = b - 1 + sigma = {b_prime} violates b'+1 >= b >= 0 >= b' > -1/2")
    deltas = [float(deltas)] if np.isscalar(deltas) else [float(d) for d in deltas]
    if st_grid is None:
        st_grid = SpaceTimeGrid(u0.grid, 1024, 2.0)
    for delta in deltas:
        if not 0 < delta < 1 or 2 * delta > st_grid.t_window * (1 + 1e-12):
            raise ValidationError(f"delta={delta} must lie in (0,1) with 2 delta inside the time window")

    idx = BourgainIndex(s, b)
    data_norm = hs_norm(u0, s)
    free = linear_evolution(u0, st_grid, params)
    forcing = apply_time_cutoff(free, 1.0)
    forcing_norm = xsb_norm(forcing, BourgainIndex(s, b_prime), params)
    integral = duhamel(forcing, params)

    rows = []
    for delta in deltas:
        free_lhs = xsb_norm(apply_time_cutoff(free, delta), idx, params)
        duhamel_lhs = xsb_norm(apply_time_cutoff(integral, delta), idx, params)
        free_scale = delta ** ((1.0 - 2.0 * b) / 2.0) * data_norm
        duhamel_scale = delta ** (1.0 + b_prime - b) * forcing_norm
        rows.append(LinearEstimateRow(
            delta=delta,
            free_lhs=free_lhs,
            free_data=data_norm,
            free_constant=free_lhs / free_scale if free_scale > 0 else 0.0,
            duhamel_lhs=duhamel_lhs,
            duhamel_data=forcing_norm,
            duhamel_constant=duhamel_lhs / duhamel_scale if duhamel_scale > 0 else 0.0,
        ))
    return LinearEstimateReport(
        s=s, b=b, b_prime=b_prime, rows=rows,
        free_exponent=_fit_exponent(deltas, [r.free_lhs for r in rows]),
        duhamel_exponent=_fit_exponent(deltas, [r.duhamel_lhs for r in rows]),
    )
