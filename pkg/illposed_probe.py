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
Picard iterates of the Benjamin equation for thin-annulus data.

The data is f^(xi) = c 1{ ||xi| - N| <= r } with c = r^(-1/2) N^(-s) and
r = 1/(sqrt(N) log N), so ||f||_{H^s} ~ 1. Writing

    D_t(theta) = (e^{i t theta} - 1) / theta            (D_t(0) = i t)

the iterates solve u_t = i p(D) u - d_x(u^2) and read, with measure dxi/2pi,

    A2^(xi) = -xi e^{itp(xi)} / (2 pi) int f^(xi1) f^(xi - xi1) D_t(phi2) dxi1
    A3^(xi) = xi e^{itp(xi)} / (2 pi^2) int int f^ f^ f^ Q1 (D_t(theta) - D_t(phi)) deta dxi2

where eta = xi2 + xi3, xi1 = xi - eta, phi2 = p(xi2) + p(xi3) - p(eta),
phi = p(xi1) + p(eta) - p(xi), theta = phi2 + phi and Q1 = eta / phi2.
The first term is G1, the second G2.

Everything is done in frequency variables. Mixed-sign patterns keep
|t theta| small, so G1 is a plain nested Gauss-Legendre sum. phi vanishes
at eta = 0 and oscillates fast away from it; G2 is integrated on panels
that grow geometrically away from zero, with a Legendre expansion of the
amplitude against exact moments of e^{i Omega x} on each panel.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Chebyshev
from numpy.polynomial.legendre import leggauss, legvander
from scipy.special import spherical_jn

from bilinear_probe import fit_loglog
from bourgain import SpaceTimeField, SpaceTimeGrid, linear_evolution
from config import BLAB_SEED, DEFAULT_QUAD_NODES, DEFAULT_T_EVAL
from dispersion import (
    DispersionParams,
    group_velocity,
    phase,
    phase_curvature,
    resonance_pair,
    resonance_quotient,
)
from errors import QuadratureError, ValidationError
from grid_fourier import SpatialGrid, SpectralField, inverse
from reporting import run_parallel

logger = logging.getLogger(__name__)

MIN_NODES = 32
TAYLOR_CUTOFF = 1e-6
NEAR_PHASE = 4.0 * math.pi      # |t phi| below which G2 panels use plain quadrature
REFINEMENT_TOLERANCE = 0.10
CHEBYSHEV_DEGREE = 24


@dataclass(frozen=True)
class PicardProbeSpec:
    n_param: float
    s: float
    t_eval: float = DEFAULT_T_EVAL
    params: DispersionParams = field(default_factory=DispersionParams)

    def __post_init__(self):
        if not self.n_param >= 4:
            raise ValidationError(f"N must be >= 4, got {self.n_param}")
        if not (math.isfinite(self.t_eval) and self.t_eval >= 0):
            raise ValidationError(f"t_eval must be a nonnegative number, got {self.t_eval}")
        if self.n_param < 2 ** 8:
            logger.info("N = %g is below 2^8; the annuli are not yet thin", self.n_param)

    @property
    def r(self) -> float:
        return 1.0 / (math.sqrt(self.n_param) * math.log(self.n_param))

    @property
    def amplitude(self) -> float:
        """c = r^(-1/2) N^(-s)."""
        return self.r ** -0.5 * self.n_param ** -self.s


class ThetaCase(str, Enum):
    CASE_PMMM = 'pmmm'   # (+,-,-,-)
    CASE_PMMP = 'pmmp'   # (+,-,-,+)


# ==================== Four-frequency phase ====================

def theta_direct(params: DispersionParams, xi1, xi2, xi3):
    """p(xi1) + p(xi2) + p(xi3) - p(xi1 + xi2 + xi3)."""
    xi1, xi2, xi3 = (np.asarray(v, dtype=float) for v in (xi1, xi2, xi3))
    return phase(params, xi1) + phase(params, xi2) + phase(params, xi3) - phase(params, xi1 + xi2 + xi3)


def four_wave_phase(params: DispersionParams, xi1, xi2, xi3):
    """theta as p2(xi2, xi3) + p2(xi1, xi2 + xi3), free of the N^3 cancellation."""
    xi1, xi2, xi3 = (np.asarray(v, dtype=float) for v in (xi1, xi2, xi3))
    return resonance_pair(params, xi2, xi3) + resonance_pair(params, xi1, xi2 + xi3)


_CASE_SIGNS = {
    ThetaCase.CASE_PMMM: (1, -1, -1, -1),
    ThetaCase.CASE_PMMP: (1, -1, -1, 1),
}


def theta_closed(params: DispersionParams, xi1, xi2, xi3, case: ThetaCase):
    """
    Factored theta for the sign patterns of (xi1, xi2, xi3, xi4 = -(xi1+xi2+xi3)).

    Case (+,-,-,-):
        3 beta (xi1+xi4)(xi2+xi4)(xi3+xi4) - alpha ((xi3+xi4) 2 xi2 + 2 xi3 xi4)
    Case (+,-,-,+):
        3 beta (xi2+xi4)(xi3+xi4)(xi1 + xi4 - 2 alpha / (3 beta))

    Raises:
        ValidationError: If any sample's signs do not match the case
    """
    case = ThetaCase(case)
    xi1, xi2, xi3 = (np.asarray(v, dtype=float) for v in (xi1, xi2, xi3))
    xi4 = -(xi1 + xi2 + xi3)
    for value, sign in zip((xi1, xi2, xi3, xi4), _CASE_SIGNS[case]):
        if np.any(sign * value < 0):
            raise ValidationError(f"frequencies do not follow the sign pattern of {case.value}")
    al, be = params.alpha, params.beta
    if case is ThetaCase.CASE_PMMM:
        return 3 * be * (xi1 + xi4) * (xi2 + xi4) * (xi3 + xi4) - al * ((xi3 + xi4) * 2 * xi2 + 2 * xi3 * xi4)
    return 3 * be * (xi2 + xi4) * (xi3 + xi4) * (xi1 + xi4 - 2 * al / (3 * be))


@dataclass
class ThetaDichotomy:
    samples: int
    coherent: int
    mixed: int
    coherent_min: float    # min |theta| / (|beta| N^3) over same-sign samples
    coherent_max: float
    mixed_max: float       # max |theta| / (25 |beta| r^2 N + 8 |alpha| r^2)
    violations: int

    @property
    def holds(self) -> bool:
        return self.violations == 0


def theta_dichotomy(params: DispersionParams, n_param: float, samples: int = 100_000,
                    seed: int = BLAB_SEED) -> ThetaDichotomy:
    """
    Sample xi1, xi2, xi3 from the two annuli |xi| in [N - r, N + r] and check
    that |theta| is either in [8, 48] |beta| N^3 (all signs equal) or below
    25 |beta| r^2 N + 8 |alpha| r^2.
    """
    if samples < 1:
        raise ValidationError("need at least one sample")
    spec = PicardProbeSpec(n_param, 0.0, params=params)
    rng = np.random.Generator(np.random.Philox(seed))
    signs = rng.choice([-1.0, 1.0], size=(3, samples))
    xi = signs * (n_param + spec.r * rng.uniform(-1.0, 1.0, size=(3, samples)))
    theta = np.abs(four_wave_phase(params, xi[0], xi[1], xi[2]))

    coherent = np.all(signs == signs[0], axis=0)
    cube = abs(params.beta) * n_param ** 3
    small = 25 * abs(params.beta) * spec.r ** 2 * n_param + 8 * abs(params.alpha) * spec.r ** 2
    c_ratio = theta[coherent] / cube
    m_ratio = theta[~coherent] / small
    violations = int(np.sum((c_ratio < 8) | (c_ratio > 48)) + np.sum(m_ratio > 1))
    return ThetaDichotomy(
        samples=samples,
        coherent=int(coherent.sum()),
        mixed=int((~coherent).sum()),
        coherent_min=float(c_ratio.min()) if c_ratio.size else math.nan,
        coherent_max=float(c_ratio.max()) if c_ratio.size else math.nan,
        mixed_max=float(m_ratio.max()) if m_ratio.size else math.nan,
        violations=violations,
    )


# ==================== Quadrature helpers ====================

def duhamel_kernel(theta, t: float):
    """(e^{i t theta} - 1) / theta, switching to a 3-term series when |t theta| is tiny."""
    theta = np.asarray(theta, dtype=float)
    x = t * theta
    small = np.abs(x) < TAYLOR_CUTOFF
    with np.errstate(divide='ignore', invalid='ignore'):
        general = (np.exp(1j * x) - 1.0) / theta
    series = 1j * t * (1.0 + 0.5j * x - x * x / 6.0)
    return np.where(small, series, general)


@lru_cache(maxsize=None)
def _gauss_legendre(q: int) -> Tuple[np.ndarray, np.ndarray]:
    return leggauss(q)


def _mapped_nodes(lo, hi, q: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights on [lo, hi]; array bounds give shape (..., q)."""
    x, w = _gauss_legendre(q)
    lo = np.asarray(lo, dtype=float)[..., None]
    hi = np.asarray(hi, dtype=float)[..., None]
    half = 0.5 * (hi - lo)
    return 0.5 * (hi + lo) + half * x, half * w


def _pieces(lo: float, hi: float, breaks: Sequence[float]) -> List[Tuple[float, float]]:
    edges = sorted({lo, hi, *(b for b in breaks if lo < b < hi)})
    return [(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _check_nodes(nodes: int):
    if nodes < MIN_NODES:
        raise ValidationError(f"need at least {MIN_NODES} quadrature nodes per r-interval, got {nodes}")


# ==================== A1, A2 ====================

def picard_grid(spec: PicardProbeSpec, nt: int = 8, t_window: float = 1.0) -> SpaceTimeGrid:
    """Smallest power-of-two grid with dxi <= r/4 whose band reaches 1.5 (N + r)."""
    box = 2.0 ** math.ceil(math.log2(8.0 * math.pi / spec.r))
    n = 2 ** math.ceil(math.log2(1.5 * (spec.n_param + spec.r) * box / math.pi))
    return SpaceTimeGrid(SpatialGrid(int(max(n, 8)), box), nt, t_window)


def annulus_data(spec: PicardProbeSpec, grid: SpatialGrid) -> SpectralField:
    """
    Grid coefficients of f.

    Raises:
        ValidationError: If dxi > r/4 or the grid band stops short of N + r
    """
    if grid.dxi > spec.r / 4:
        raise ValidationError(f"dxi = {grid.dxi:.3g} does not resolve r = {spec.r:.3g}")
    xi = grid.wavenumbers
    if np.max(np.abs(xi)) <= spec.n_param + spec.r:
        raise ValidationError(f"grid band does not reach N + r = {spec.n_param + spec.r:.4g}")
    inside = np.abs(np.abs(xi) - spec.n_param) <= spec.r
    coefficients = np.where(inside & ~grid.nyquist_mask, spec.amplitude, 0.0)
    return SpectralField(grid, coefficients)


def picard_a1(spec: PicardProbeSpec, st_grid: Optional[SpaceTimeGrid] = None) -> SpaceTimeField:
    """A1(f) = W(t) f on a grid resolving the annulus width."""
    st_grid = st_grid or picard_grid(spec)
    f = inverse(annulus_data(spec, st_grid.spatial))
    return linear_evolution(f, st_grid, spec.params)


@dataclass
class FrequencySamples:
    xi: np.ndarray
    weights: np.ndarray
    values: np.ndarray

    def hs_norm(self, s: float) -> float:
        """(sum w <xi>^{2s} |v|^2 / 2pi)^(1/2) over the sampled frequencies."""
        weights = (1.0 + self.xi ** 2) ** s
        return float(np.sqrt(np.sum(self.weights * weights * np.abs(self.values) ** 2) / (2 * np.pi)))


def picard_a2(spec: PicardProbeSpec, nodes: int = DEFAULT_QUAD_NODES) -> FrequencySamples:
    """
    A2^(xi, t_eval) at Gauss-Legendre nodes covering its support
    (|xi| <= 2r and ||xi| - 2N| <= 2r).

    Nodes are placed on xi >= 0 only; the negative half follows from the
    reality of the data.
    """
    _check_nodes(nodes)
    n, r, t, params = spec.n_param, spec.r, spec.t_eval, spec.params
    groups = (
        (0.0, 2 * r, ((1, -1), (-1, 1))),
        (2 * n - 2 * r, 2 * n + 2 * r, ((1, 1),)),
    )
    xs, ws, vs = [], [], []
    for start, end, patterns in groups:
        for lo, hi in _pieces(start, end, [0.5 * (start + end)]):
            xi, w = _mapped_nodes(lo, hi, nodes)
            xi, w = xi.ravel(), w.ravel()
            total = np.zeros(xi.size, dtype=complex)
            for s1, s2 in patterns:
                a = np.maximum(s1 * n - r, xi - s2 * n - r)
                b = np.minimum(s1 * n + r, xi - s2 * n + r)
                b = np.maximum(a, b)
                xi1, w1 = _mapped_nodes(a, b, nodes)
                theta2 = resonance_pair(params, xi1, xi[:, None] - xi1)
                total += np.sum(w1 * duhamel_kernel(theta2, t), axis=1)
            values = -xi * np.exp(1j * t * phase(params, xi)) / (2 * np.pi) * spec.amplitude ** 2 * total
            xs.append(xi)
            ws.append(w)
            vs.append(values)
    xi, w, v = np.concatenate(xs), np.concatenate(ws), np.concatenate(vs)
    # real data: A2^(-xi) = conj A2^(xi)
    return FrequencySamples(np.concatenate([-xi[::-1], xi]), np.concatenate([w[::-1], w]),
                            np.concatenate([np.conj(v[::-1]), v]))


# ==================== A3 ====================

@dataclass
class _InnerProfile:
    """I(eta) = int Q1(xi2, eta - xi2) dxi2 over one (sigma2, sigma3) pattern, piecewise Chebyshev."""
    breaks: np.ndarray
    pieces: List[Chebyshev]

    def __call__(self, eta: np.ndarray) -> np.ndarray:
        eta = np.asarray(eta, dtype=float)
        out = np.zeros(eta.shape)
        for k, fit in enumerate(self.pieces):
            inside = (eta >= self.breaks[k]) & (eta <= self.breaks[k + 1])
            out[inside] = fit(eta[inside])
        return out


def _inner_bounds(n: float, r: float, s2: int, s3: int, eta):
    lo = np.maximum(s2 * n - r, eta - s3 * n - r)
    hi = np.minimum(s2 * n + r, eta - s3 * n + r)
    return lo, np.maximum(lo, hi)


def _inner_integral(params: DispersionParams, n: float, r: float, s2: int, s3: int,
                    eta: np.ndarray, nodes: int) -> np.ndarray:
    eta = np.asarray(eta, dtype=float)
    lo, hi = _inner_bounds(n, r, s2, s3, eta)
    xi2, w2 = _mapped_nodes(lo, hi, nodes)
    return np.sum(w2 * resonance_quotient(params, xi2, eta[..., None] - xi2), axis=-1)


@lru_cache(maxsize=64)
def _inner_profile(params: DispersionParams, n: float, r: float, s2: int, s3: int,
                   nodes: int) -> _InnerProfile:
    center = (s2 + s3) * n
    edges = [center - 2 * r, center, center + 2 * r]
    pieces = [
        Chebyshev.interpolate(
            lambda eta: _inner_integral(params, n, r, s2, s3, eta, nodes),
            CHEBYSHEV_DEGREE, domain=[a, b],
        )
        for a, b in zip(edges[:-1], edges[1:])
    ]
    return _InnerProfile(np.asarray(edges), pieces)


def _eta_window(xi: float, pattern: Tuple[int, int, int], n: float, r: float) -> Tuple[float, float]:
    s1, s2, s3 = pattern
    center = (s2 + s3) * n
    return max(center - 2 * r, xi - s1 * n - r), min(center + 2 * r, xi - s1 * n + r)


def _outer_phase(params: DispersionParams, xi: float, eta):
    """phi(eta) = p(xi - eta) + p(eta) - p(xi) for fixed xi."""
    return resonance_pair(params, xi - eta, eta)


def _outer_slope(params: DispersionParams, xi: float, eta):
    flat = replace(params, gamma=0.0)
    return group_velocity(flat, eta) - group_velocity(flat, xi - eta)


def _panels(params: DispersionParams, xi: float, lo: float, hi: float, breaks: Sequence[float],
            t: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Split [lo, hi] into (center, half width, near) panels for the eta integral.

    Near panels lie where |t phi| <= NEAR_PHASE around eta = 0. Far panels
    are no wider than their distance to 0, and narrow enough that the
    quadratic part of t phi stays below 1 in size.
    """
    slope0 = abs(_outer_slope(params, xi, 0.0))
    near = math.inf if t == 0 or slope0 == 0 else NEAR_PHASE / (t * slope0)
    probes = np.array([lo, hi, 0.0])
    curvature = float(np.max(np.abs(phase_curvature(params, probes)))
                      + np.max(np.abs(phase_curvature(params, xi - probes))))
    max_half = math.inf if t == 0 or curvature == 0 else 1.0 / math.sqrt(t * curvature)

    centers, halves, near_flags = [], [], []
    for a, b in _pieces(lo, hi, [*breaks, 0.0, -near, near]):
        if max(abs(a), abs(b)) <= near:
            centers.append(0.5 * (a + b))
            halves.append(0.5 * (b - a))
            near_flags.append(True)
            continue
        # walk away from zero
        start, stop = (a, b) if a >= 0 else (b, a)
        direction = 1.0 if stop > start else -1.0
        pos = start
        while direction * (stop - pos) > 0:
            width = min(max(abs(pos), 1e-300), 2 * max_half, abs(stop - pos))
            centers.append(pos + direction * width / 2)
            halves.append(width / 2)
            near_flags.append(False)
            pos += direction * width
    return np.asarray(centers), np.asarray(halves), np.asarray(near_flags, dtype=bool)


def _filon_sum(params: DispersionParams, xi: float, t: float, centers: np.ndarray, halves: np.ndarray,
               eta: np.ndarray, amplitude: np.ndarray, nodes: int) -> complex:
    """
    sum over panels of int amplitude(eta) e^{i t phi(eta)} deta.

    On each panel t phi = Phi_c + Omega x + delta(x); e^{i delta} goes into the
    amplitude, whose Legendre coefficients are integrated against
    int P_n(x) e^{i Omega x} dx = 2 i^n j_n(Omega).
    """
    if centers.size == 0:
        return 0j
    x, w = _gauss_legendre(nodes)
    phi_c = t * _outer_phase(params, xi, centers)
    omega = t * _outer_slope(params, xi, centers) * halves
    delta = t * _outer_phase(params, xi, eta) - phi_c[:, None] - omega[:, None] * x[None, :]
    amp = halves[:, None] * amplitude * np.exp(1j * delta)

    orders = np.arange(nodes)
    vander = legvander(x, nodes - 1)
    coeffs = ((amp * w) @ vander) * (orders + 0.5)
    parity = np.where(omega[:, None] < 0, (-1.0) ** orders, 1.0)
    moments = 2.0 * (1j ** orders) * spherical_jn(orders[None, :], np.abs(omega)[:, None]) * parity
    return complex(np.sum(np.exp(1j * phi_c) * np.sum(coeffs * moments, axis=1)))


def _g2_single(params: DispersionParams, xi: float, pattern, n: float, r: float, t: float,
               nodes: int) -> complex:
    """int I(eta) D_t(phi(eta)) deta for one output frequency and sign pattern."""
    lo, hi = _eta_window(xi, pattern, n, r)
    if hi <= lo:
        return 0j
    profile = _inner_profile(params, n, r, pattern[1], pattern[2], nodes)
    centers, halves, near = _panels(params, xi, lo, hi, [(pattern[1] + pattern[2]) * n], t)
    x, w = _gauss_legendre(nodes)
    eta = centers[:, None] + halves[:, None] * x[None, :]
    inner = profile(eta)
    phi = _outer_phase(params, xi, eta)
    weights = halves[:, None] * w[None, :]

    total = np.sum((weights * inner * duhamel_kernel(phi, t))[near])
    far = ~near
    if np.any(far):
        with np.errstate(divide='ignore', invalid='ignore'):
            ratio = np.where(phi[far] != 0, inner[far] / phi[far], 0.0)
        oscillating = _filon_sum(params, xi, t, centers[far], halves[far], eta[far], ratio, nodes)
        total += oscillating - np.sum(weights[far] * ratio)
    return complex(total)


def _g1_mixed(params: DispersionParams, xi: float, pattern, n: float, r: float, t: float,
              nodes: int) -> complex:
    """Nested Gauss-Legendre sum of Q1 D_t(theta); |t theta| stays small here."""
    lo, hi = _eta_window(xi, pattern, n, r)
    if hi <= lo:
        return 0j
    s2, s3 = pattern[1], pattern[2]
    total = 0j
    for a, b in _pieces(lo, hi, [(s2 + s3) * n, 0.0]):
        eta, w_eta = _mapped_nodes(a, b, nodes)
        eta, w_eta = eta.ravel(), w_eta.ravel()
        l2, h2 = _inner_bounds(n, r, s2, s3, eta)
        xi2, w2 = _mapped_nodes(l2, h2, nodes)
        xi3 = eta[:, None] - xi2
        theta = resonance_pair(params, xi2, xi3) + _outer_phase(params, xi, eta)[:, None]
        q1 = resonance_quotient(params, xi2, xi3)
        total += np.sum(w_eta * np.sum(w2 * q1 * duhamel_kernel(theta, t), axis=1))
    return complex(total)


def _g1_coherent(params: DispersionParams, xi: float, pattern, n: float, r: float, t: float,
                 nodes: int) -> complex:
    """
    Same-sign pattern: |theta| ~ N^3 never vanishes, so D_t(theta) splits into
    e^{it phi} (Q1 e^{it phi2} / theta) - Q1 / theta and the first part goes
    through the oscillatory panels in eta.
    """
    lo, hi = _eta_window(xi, pattern, n, r)
    if hi <= lo:
        return 0j
    s2, s3 = pattern[1], pattern[2]
    centers, halves, _ = _panels(params, xi, lo, hi, [(s2 + s3) * n], t)
    x, w = _gauss_legendre(nodes)
    eta = centers[:, None] + halves[:, None] * x[None, :]
    l2, h2 = _inner_bounds(n, r, s2, s3, eta)
    xi2, w2 = _mapped_nodes(l2, h2, nodes)
    xi3 = eta[..., None] - xi2
    phi2 = resonance_pair(params, xi2, xi3)
    theta = phi2 + _outer_phase(params, xi, eta)[..., None]
    q1 = resonance_quotient(params, xi2, xi3)
    amplitude = np.sum(w2 * q1 * np.exp(1j * t * phi2) / theta, axis=-1)
    plain = np.sum(halves[:, None] * w[None, :] * np.sum(w2 * q1 / theta, axis=-1))
    return _filon_sum(params, xi, t, centers, halves, eta, amplitude, nodes) - plain


_NEAR_N = ((1, 1, -1), (1, -1, 1), (-1, 1, 1))
_NEAR_3N = ((1, 1, 1),)


@dataclass(frozen=True)
class _A3Profile:
    """Pattern sums of G1 and G2 at xi > 0 nodes, without the xi c^3 / (2 pi^2) factor."""
    xi: np.ndarray
    weights: np.ndarray
    g1: np.ndarray
    g2: np.ndarray


@lru_cache(maxsize=32)
def _a3_profile(params: DispersionParams, n: float, t: float, nodes: int) -> _A3Profile:
    r = 1.0 / (math.sqrt(n) * math.log(n))
    xs, ws, g1s, g2s = [], [], [], []
    for center, patterns in ((n, _NEAR_N), (3 * n, _NEAR_3N)):
        for lo, hi in _pieces(center - 3 * r, center + 3 * r, [center - r, center + r]):
            xi, w = _mapped_nodes(lo, hi, nodes)
            for x_out, w_out in zip(xi.ravel(), w.ravel()):
                g1 = g2 = 0j
                for pattern in patterns:
                    if len(set(pattern)) == 1:
                        g1 += _g1_coherent(params, x_out, pattern, n, r, t, nodes)
                    else:
                        g1 += _g1_mixed(params, x_out, pattern, n, r, t, nodes)
                    g2 += _g2_single(params, x_out, pattern, n, r, t, nodes)
                xs.append(x_out)
                ws.append(w_out)
                g1s.append(g1)
                g2s.append(g2)
    logger.debug("A3 profile for N=%g, t=%g, q=%d: %d output nodes", n, t, nodes, len(xs))
    return _A3Profile(np.asarray(xs), np.asarray(ws), np.asarray(g1s), np.asarray(g2s))


def _profile_norm(profile: _A3Profile, values: np.ndarray, spec: PicardProbeSpec) -> float:
    """H^s norm of xi e^{itp} c^3 values / (2 pi^2), mirrored to xi < 0."""
    amp = profile.xi * spec.amplitude ** 3 / (2 * np.pi ** 2) * np.abs(values)
    weights = (1.0 + profile.xi ** 2) ** spec.s
    return float(np.sqrt(2.0 * np.sum(profile.weights * weights * amp ** 2) / (2 * np.pi)))


@dataclass
class A3Parts:
    g1: float
    g2: float
    a3: float


def _parts(spec: PicardProbeSpec, nodes: int) -> A3Parts:
    if spec.t_eval == 0:
        return A3Parts(0.0, 0.0, 0.0)
    profile = _a3_profile(spec.params, float(spec.n_param), float(spec.t_eval), nodes)
    return A3Parts(
        g1=_profile_norm(profile, profile.g1, spec),
        g2=_profile_norm(profile, profile.g2, spec),
        a3=_profile_norm(profile, profile.g1 - profile.g2, spec),
    )


def picard_a3_parts(spec: PicardProbeSpec, nodes: int = DEFAULT_QUAD_NODES) -> A3Parts:
    """H^s norms of the G1 part, the G2 part and their difference A3 at t_eval."""
    _check_nodes(nodes)
    return _parts(spec, nodes)


def picard_a3_norm(spec: PicardProbeSpec, nodes: int = DEFAULT_QUAD_NODES) -> float:
    """
    ||A3(f)(t_eval)||_{H^s}.

    Raises:
        ValidationError: If nodes < 32
        QuadratureError: If halving the node count moves the result by more than 10%
    """
    _check_nodes(nodes)
    fine = _parts(spec, nodes).a3
    coarse = _parts(spec, nodes // 2).a3
    if abs(fine - coarse) > REFINEMENT_TOLERANCE * fine:
        raise QuadratureError(
            f"A3 norm moved from {coarse:.4g} to {fine:.4g} between {nodes // 2} and {nodes} nodes"
        )
    return fine


def g2_over_g1(spec: PicardProbeSpec, nodes: int = DEFAULT_QUAD_NODES) -> float:
    parts = picard_a3_parts(spec, nodes)
    if parts.g1 == 0:
        raise ValidationError("G1 vanishes; the ratio is undefined")
    return parts.g2 / parts.g1


@dataclass
class GrowthFit:
    s: float
    n_values: List[float]
    norms: List[float]
    scaled: List[float]          # norm * log N
    slope: float
    residual: float

    @property
    def expected(self) -> float:
        return -2.0 * self.s - 1.5


def growth_fit(s: float, n_list: Sequence[float], params: Optional[DispersionParams] = None,
               t_eval: float = DEFAULT_T_EVAL, nodes: int = DEFAULT_QUAD_NODES,
               threads: Optional[int] = None) -> GrowthFit:
    """
    Slope of log(||A3|| log N) against log N; expected -2s - 3/2.

    Raises:
        ValidationError: If fewer than 4 values of N are given or they are not geometric
    """
    params = params or DispersionParams()
    n_values = sorted(float(n) for n in n_list)
    if len(n_values) < 4:
        raise ValidationError(f"growth fit needs at least 4 values of N, got {len(n_values)}")
    ratios = np.asarray(n_values[1:]) / np.asarray(n_values[:-1])
    if np.any(ratios <= 1) or not np.allclose(ratios, ratios[0], rtol=0.05):
        raise ValidationError("N values must be geometrically spaced")
    specs = [PicardProbeSpec(n, s, t_eval, params) for n in n_values]
    norms = run_parallel(lambda spec: picard_a3_norm(spec, nodes), specs, threads)
    scaled = [norm * math.log(n) for norm, n in zip(norms, n_values)]
    slope, residual = fit_loglog(n_values, scaled)
    logger.info("A3 growth for s=%g: slope %.3f (expected %.3f)", s, slope, -2 * s - 1.5)
    return GrowthFit(s, n_values, list(norms), scaled, slope, residual)
