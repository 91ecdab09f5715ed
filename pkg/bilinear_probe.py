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
Empirical probes of the bilinear estimate

    || d_x(uv) ||_{X_{s, b-1+eps}} <= c ||u||_{X_{s,b}} ||v||_{X_{s,b}}.

Two representations are used. ``bilinear_ratio`` works on sampled space-time
fields and suits smooth, low-frequency data. The counterexample families live
on thin sets near |xi| = N whose width shrinks like N^(-1/2); no periodic
grid resolves them at useful N, so they are built on a sparse Fourier
lattice (``FourierLattice``/``LatticeField``) that stores only occupied
cells and convolves by explicit pair accumulation.

Sets are sharp indicators realized cell-wise: a cell belongs to a set iff
its center does.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from bourgain import (
    BourgainIndex,
    SpaceTimeField,
    SpaceTimeGrid,
    grid_symbol,
    japanese,
    pulled_back_spectrum,
    xsb_norm,
)
from config import DEFAULT_EPS
from dispersion import DispersionParams, group_velocity, phase, phase_curvature
from errors import ValidationError
from grid_fourier import SpatialGrid, dealias_mask, derivative_multiplier, fft_space, ifft_space
from reporting import run_parallel

logger = logging.getLogger(__name__)

_PAIR_CHUNK = 1 << 20


# ==================== Sampled fields ====================

def bilinear_ratio(u: SpaceTimeField, v: SpaceTimeField, s: float, b: float,
                   eps: float, params: DispersionParams) -> float:
    """
    ||d_x(uv)||_{X_{s,b-1+eps}} / (||u||_{X_{s,b}} ||v||_{X_{s,b}}).

    The product is formed slice by slice from dealiased factors and dealiased
    again before differentiation.

    Raises:
        ValidationError: If eps <= 0, the grids differ, or a factor is zero
    """
    if not eps > 0:
        raise ValidationError(f"eps must be positive, got {eps}")
    if u.grid != v.grid:
        raise ValidationError("bilinear_ratio needs both fields on one grid")
    idx = BourgainIndex(s, b)
    nu = xsb_norm(u, idx, params)
    nv = xsb_norm(v, idx, params)
    if nu == 0 or nv == 0:
        raise ValidationError("bilinear ratio is undefined for a zero field")

    spatial = u.grid.spatial
    mask = dealias_mask(spatial)
    cu = np.where(mask, fft_space(u.values, spatial), 0.0)
    cv = np.where(mask, fft_space(v.values, spatial), 0.0)
    product = ifft_space(cu, spatial) * ifft_space(cv, spatial)
    flux = derivative_multiplier(spatial, 1) * np.where(mask, fft_space(product, spatial), 0.0)
    values = ifft_space(flux, spatial)
    if not (np.iscomplexobj(u.values) or np.iscomplexobj(v.values)):
        values = values.real
    numerator = xsb_norm(SpaceTimeField(u.grid, values), BourgainIndex(s, b - 1.0 + eps), params)
    return numerator / (nu * nv)


@dataclass(frozen=True)
class Counterexample1Spec:
    n_param: float
    params: DispersionParams = field(default_factory=DispersionParams)

    def __post_init__(self):
        if not self.n_param >= 4:
            raise ValidationError(f"N must be >= 4, got {self.n_param}")

    @property
    def width(self) -> float:
        """xi-width N^(-1/2) of the set A."""
        return self.n_param ** -0.5


def case1_grid(spec: Counterexample1Spec, nt: int = 64) -> SpaceTimeGrid:
    """Smallest power-of-two space-time grid that resolves A and -A."""
    box = 2.0 ** math.ceil(math.log2(16.0 * math.pi / spec.width))
    n = 2 ** math.ceil(math.log2(3.0 * (spec.n_param + spec.width) * box / math.pi))
    return SpaceTimeGrid(SpatialGrid(int(max(n, 8)), box), nt, 4.0 * math.pi)


def _field_from_spectrum(spectrum: np.ndarray, grid: SpaceTimeGrid, params: DispersionParams,
                         label: str) -> SpaceTimeField:
    """Invert bourgain.pulled_back_spectrum for a (lambda, xi) array in FFT order."""
    sign = np.where(grid.temporal_indices % 2 == 0, 1.0, -1.0)
    pulled = np.fft.ifft(spectrum * sign[:, None], axis=0) / grid.dt
    p = grid_symbol(params, grid.spatial)
    coeffs = np.exp(1j * grid.times[:, None] * p[None, :]) * pulled
    values = ifft_space(coeffs, grid.spatial)
    imag = float(np.max(np.abs(values.imag)))
    scale = float(np.max(np.abs(values.real))) or 1.0
    if imag > 1e-10 * scale:
        logger.warning("%s field has imaginary residue %.3g (relative)", label, imag / scale)
    return SpaceTimeField(grid, values.real)


def build_case1(spec: Counterexample1Spec, grid: SpaceTimeGrid) -> SpaceTimeField:
    """
    Real field whose space-time spectrum is the indicator of A u (-A).

    A = {N <= xi <= N + N^(-1/2), |tau - p(xi)| <= 1}.

    Raises:
        ValidationError: If dxi > N^(-1/2)/8, dlambda > 1/4, or the grid
            does not reach N + N^(-1/2) inside its dealiased band
    """
    spatial = grid.spatial
    dlam = math.pi / grid.t_window
    if spatial.dxi > spec.width / 8:
        raise ValidationError(f"dxi = {spatial.dxi:.3g} does not resolve the width {spec.width:.3g} of A")
    if dlam > 0.25:
        raise ValidationError(f"dlambda = {dlam:.3g} exceeds 1/4")
    xi = spatial.wavenumbers
    top = spec.n_param + spec.width
    if top > np.max(xi[dealias_mask(spatial)]):
        raise ValidationError(f"grid band does not reach xi = {top:.4g}")

    lam = grid.modulations
    in_xi = (np.abs(xi) >= spec.n_param) & (np.abs(xi) <= top)
    in_lam = np.abs(lam) <= 1.0
    spectrum = (in_lam[:, None] & in_xi[None, :]).astype(complex)
    return _field_from_spectrum(spectrum, grid, spec.params, "case-1")


def fourier_l2(u: SpaceTimeField, params: DispersionParams) -> float:
    """(sum |f^|^2 dxi dlambda)^(1/2) of the pulled-back spectrum."""
    spectrum = pulled_back_spectrum(u, params)
    cell = u.grid.spatial.dxi * math.pi / u.grid.t_window
    return float(np.sqrt(np.sum(np.abs(spectrum) ** 2) * cell))


# ==================== Sparse Fourier lattice ====================

@dataclass(frozen=True)
class FourierLattice:
    """Cells of size dxi x dtau centered at (k dxi, m dtau)."""
    dxi: float
    dtau: float

    def __post_init__(self):
        if not (self.dxi > 0 and self.dtau > 0):
            raise ValidationError("lattice spacings must be positive")

    @property
    def cell_area(self) -> float:
        return self.dxi * self.dtau


@dataclass
class LatticeField:
    lattice: FourierLattice
    ix: np.ndarray
    it: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.ix = np.asarray(self.ix, dtype=np.int64)
        self.it = np.asarray(self.it, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=float)
        if not (self.ix.shape == self.it.shape == self.values.shape):
            raise ValidationError("lattice index and value arrays must have one shape")

    @property
    def xi(self) -> np.ndarray:
        return self.ix * self.lattice.dxi

    @property
    def tau(self) -> np.ndarray:
        return self.it * self.lattice.dtau

    @property
    def size(self) -> int:
        return int(self.values.size)

    def area(self) -> float:
        return float(np.count_nonzero(self.values)) * self.lattice.cell_area

    def modulation(self, params: DispersionParams) -> np.ndarray:
        return self.tau - phase(params, self.xi)

    def scaled(self, c: float) -> 'LatticeField':
        return LatticeField(self.lattice, self.ix, self.it, c * self.values)

    def reflected(self) -> 'LatticeField':
        """(xi, tau) -> (-xi, -tau)."""
        return LatticeField(self.lattice, -self.ix, -self.it, self.values)

    def l2(self) -> float:
        return float(np.sqrt(np.sum(self.values ** 2) * self.lattice.cell_area))

    def weighted_norm(self, s: float, b: float, params: DispersionParams) -> float:
        """(sum <xi>^{2s} <tau - p(xi)>^{2b} |f|^2 dxi dtau)^(1/2)."""
        weights = japanese(self.xi) ** (2 * s) * japanese(self.modulation(params)) ** (2 * b)
        return float(np.sqrt(np.sum(weights * self.values ** 2) * self.lattice.cell_area))

    def keys(self) -> np.ndarray:
        return np.stack([self.ix, self.it], axis=1)

    def value_at(self, ix: int, it: int) -> float:
        hit = (self.ix == ix) & (self.it == it)
        return float(self.values[hit].sum())

    def hermitian_defect(self) -> float:
        """max |f(-zeta) - f(zeta)| over the support (real data)."""
        mirrored = _accumulate(-self.ix, -self.it, self.values, self.lattice)
        own = _accumulate(self.ix, self.it, self.values, self.lattice)
        both = union(own, mirrored.scaled(-1.0))
        return float(np.max(np.abs(both.values))) if both.size else 0.0


def _accumulate(ix: np.ndarray, it: np.ndarray, values: np.ndarray,
                lattice: FourierLattice) -> LatticeField:
    """Sum values landing on the same cell; output sorted by (ix, it)."""
    if ix.size == 0:
        return LatticeField(lattice, ix, it, values)
    keys, inverse = np.unique(np.stack([ix, it], axis=1), axis=0, return_inverse=True)
    summed = np.bincount(inverse.ravel(), weights=values, minlength=keys.shape[0])
    return LatticeField(lattice, keys[:, 0], keys[:, 1], summed)


def union(*fields: LatticeField) -> LatticeField:
    lattice = fields[0].lattice
    return _accumulate(
        np.concatenate([f.ix for f in fields]),
        np.concatenate([f.it for f in fields]),
        np.concatenate([f.values for f in fields]),
        lattice,
    )


def _pair_chunks(n_left: int, n_right: int):
    rows = max(1, _PAIR_CHUNK // max(n_right, 1))
    for start in range(0, n_left, rows):
        yield slice(start, min(start + rows, n_left))


def convolve(f: LatticeField, g: LatticeField) -> LatticeField:
    """(f * g)(zeta) = sum_{zeta'} f(zeta') g(zeta - zeta') dxi dtau."""
    parts = []
    for sl in _pair_chunks(f.size, g.size):
        ix = (f.ix[sl, None] + g.ix[None, :]).ravel()
        it = (f.it[sl, None] + g.it[None, :]).ravel()
        vals = (f.values[sl, None] * g.values[None, :]).ravel() * f.lattice.cell_area
        parts.append(_accumulate(ix, it, vals, f.lattice))
    return union(*parts) if parts else f.scaled(0.0)


def indicator(lattice: FourierLattice, params: DispersionParams, xi_range: Tuple[float, float],
              lam_range: Tuple[float, float], value: float = 1.0) -> LatticeField:
    """Cells with xi in [lo, hi] and tau - p(xi) in [lam_lo, lam_hi]."""
    lo, hi = xi_range
    k = np.arange(math.ceil(lo / lattice.dxi - 1e-9), math.floor(hi / lattice.dxi + 1e-9) + 1, dtype=np.int64)
    if k.size == 0:
        return LatticeField(lattice, k, k, np.zeros(0))
    base = phase(params, k * lattice.dxi)
    m_lo = np.ceil((base + lam_range[0]) / lattice.dtau).astype(np.int64)
    m_hi = np.floor((base + lam_range[1]) / lattice.dtau).astype(np.int64)
    counts = np.maximum(m_hi - m_lo + 1, 0)
    ix = np.repeat(k, counts)
    offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    it = np.repeat(m_lo, counts) + offsets
    return LatticeField(lattice, ix, it, np.full(ix.size, value))


def lattice_bilinear_ratio(f: LatticeField, g: LatticeField, s: float, b: float, eps: float,
                           params: DispersionParams) -> float:
    """
    Fourier-side bilinear ratio: || |xi| (f * g) ||_{(s, b-1+eps)} / (||f||_{(s,b)} ||g||_{(s,b)}).
    """
    if not eps > 0:
        raise ValidationError(f"eps must be positive, got {eps}")
    nf = f.weighted_norm(s, b, params)
    ng = g.weighted_norm(s, b, params)
    if nf == 0 or ng == 0:
        raise ValidationError("bilinear ratio is undefined for a zero field")
    conv = convolve(f, g)
    flux = LatticeField(conv.lattice, conv.ix, conv.it, np.abs(conv.xi) * conv.values)
    return flux.weighted_norm(s, b - 1.0 + eps, params) / (nf * ng)


def dual_ratio(g: LatticeField, h: LatticeField, s: float, b: float, eps: float,
               params: DispersionParams) -> float:
    """
    Duality form of the bilinear estimate tested on g, h >= 0:

        G(zeta1) = <xi1>^{-s} <lambda1>^{-b} sum_zeta g(zeta) h(zeta - zeta1)
                   xi <xi>^s <lambda>^{b-1+eps} <xi - xi1>^{-s} <lambda(zeta - zeta1)>^{-b},

    returns ||G||_{L^2} / (||g||_{L^2} ||h||_{L^2}).
    """
    ng, nh = g.l2(), h.l2()
    if ng == 0 or nh == 0:
        raise ValidationError("dual ratio is undefined for a zero field")
    lat = g.lattice
    g_weight = g.xi * japanese(g.xi) ** s * japanese(g.modulation(params)) ** (b - 1.0 + eps) * g.values
    h_weight = japanese(h.xi) ** (-s) * japanese(h.modulation(params)) ** (-b) * h.values
    parts = []
    for sl in _pair_chunks(g.size, h.size):
        ix = (g.ix[sl, None] - h.ix[None, :]).ravel()
        it = (g.it[sl, None] - h.it[None, :]).ravel()
        vals = (g_weight[sl, None] * h_weight[None, :]).ravel() * lat.cell_area
        parts.append(_accumulate(ix, it, vals, lat))
    big = union(*parts)
    lam1 = big.tau - phase(params, big.xi)
    outer = japanese(big.xi) ** (-s) * japanese(lam1) ** (-b) * big.values
    norm = float(np.sqrt(np.sum(outer ** 2) * lat.cell_area))
    return norm / (ng * nh)


def case1_lattice(spec: Counterexample1Spec) -> FourierLattice:
    return FourierLattice(spec.width / 32.0, 1.0 / 8.0)


def case1_sets(spec: Counterexample1Spec, lattice: Optional[FourierLattice] = None
               ) -> Tuple[LatticeField, LatticeField, LatticeField]:
    """
    (A, -A, B) on the lattice.

    A = {N <= xi <= N + N^(-1/2), |lambda| <= 1},
    B = {-N + N^(-1/2)/2 <= xi <= -N + 3 N^(-1/2)/4, |lambda| <= 1}.
    """
    lattice = lattice or case1_lattice(spec)
    if lattice.dxi > spec.width / 8 or lattice.dtau > 0.25:
        raise ValidationError(
            f"lattice ({lattice.dxi:.3g}, {lattice.dtau:.3g}) does not resolve the case-1 sets "
            f"(need dxi <= {spec.width / 8:.3g}, dtau <= 0.25)"
        )
    n, w = spec.n_param, spec.width
    a_set = indicator(lattice, spec.params, (n, n + w), (-1.0, 1.0))
    b_set = indicator(lattice, spec.params, (-n + w / 2, -n + 0.75 * w), (-1.0, 1.0))
    return a_set, a_set.reflected(), b_set


@dataclass
class RatioSweepResult:
    n_values: List[float]
    ratios: List[float]
    slope: Optional[float]
    residual: Optional[float]
    branch: str = 'direct'
    branches: Dict[str, List[float]] = field(default_factory=dict)
    branch_slopes: Dict[str, Optional[float]] = field(default_factory=dict)

    def spread(self) -> float:
        """max/min of the reported ratios."""
        return max(self.ratios) / min(self.ratios)


def fit_loglog(xs: Sequence[float], ys: Sequence[float]) -> Tuple[Optional[float], Optional[float]]:
    """Least-squares slope of log y against log x and the RMS residual."""
    if len(xs) < 2:
        return None, None
    lx, ly = np.log(np.asarray(xs, dtype=float)), np.log(np.asarray(ys, dtype=float))
    coeffs = np.polyfit(lx, ly, 1)
    residual = float(np.sqrt(np.mean((np.polyval(coeffs, lx) - ly) ** 2)))
    return float(coeffs[0]), residual


def predicted_case1_slopes(s: float, b: float, eps: float = DEFAULT_EPS) -> Dict[str, float]:
    """Growth exponents in N of the case-1 ratios."""
    return {
        'direct': -0.75 + 1.5 * (b - 1.0 + eps) - 2.0 * s,
        'dual': 0.75 - s - 3.0 * b,
        'lobe': 3.0 * b - s - 2.25,
    }


def _case1_ratios(args) -> Tuple[float, float]:
    n_param, s, b, eps, params = args
    spec = Counterexample1Spec(n_param, params)
    a_set, minus_a, b_set = case1_sets(spec)
    f = union(a_set, minus_a)
    direct = lattice_bilinear_ratio(f, f, s, b, eps, params)
    dual = dual_ratio(a_set, b_set, s, b, eps, params)
    logger.debug("case 1, N=%g: direct %.4g, dual %.4g", n_param, direct, dual)
    return direct, dual


def sweep_case1(s: float, b: float, n_list: Sequence[float], params: Optional[DispersionParams] = None,
                eps: float = DEFAULT_EPS, threads: Optional[int] = None) -> RatioSweepResult:
    """
    Bilinear ratios of the case-1 data over N, with a log-log slope fit.

    Both the direct ratio (f = 1_A + 1_{-A} squared) and the duality ratio
    (g = 1_A, h = 1_B) are computed; the reported branch is the one with the
    larger slope, i.e. the one that detects failure first.
    """
    params = params or DispersionParams()
    n_values = sorted(float(n) for n in n_list)
    if not n_values:
        raise ValidationError("sweep needs at least one N")
    results = run_parallel(_case1_ratios, [(n, s, b, eps, params) for n in n_values], threads)
    branches = {'direct': [r[0] for r in results], 'dual': [r[1] for r in results]}
    slopes = {name: fit_loglog(n_values, values)[0] for name, values in branches.items()}
    if slopes['direct'] is None:
        chosen = 'direct'
    else:
        chosen = max(branches, key=lambda name: slopes[name])
    slope, residual = fit_loglog(n_values, branches[chosen])
    return RatioSweepResult(n_values, branches[chosen], slope, residual, chosen, branches, slopes)


# ==================== Case 2 ====================

@dataclass(frozen=True)
class Counterexample2Spec:
    n_param: float
    m: int
    a_seq: Tuple[float, ...]
    params: DispersionParams = field(default_factory=DispersionParams)

    def __post_init__(self):
        if self.m < 0:
            raise ValidationError(f"m must be nonnegative, got {self.m}")
        if len(self.a_seq) != self.m + 1:
            raise ValidationError(f"need {self.m + 1} coefficients a_0..a_m, got {len(self.a_seq)}")
        if any(not a > 0 for a in self.a_seq):
            raise ValidationError("all a_j must be positive")
        if 4 ** (self.m + 1) > self.n_param / 16:
            raise ValidationError(f"need 4^(m+1) <= N/16, got 4^{self.m + 1} > {self.n_param / 16}")
        if phase_curvature(self.params, self.n_param) == 0:
            raise ValidationError("p''(N) = 0: the parallelograms have no concave side")

    @property
    def width(self) -> float:
        """sqrt(4^(m+1) / N), the xi-extent of every set."""
        return math.sqrt(4.0 ** (self.m + 1) / self.n_param)


def case2_lattice(spec: Counterexample2Spec) -> FourierLattice:
    return FourierLattice(spec.width / 32.0, 1.0 / 8.0)


def _parallelogram(lattice: FourierLattice, params: DispersionParams, xi_lo: float, xi_hi: float,
                   anchor_xi: float, offset: Tuple[float, float], value: float = 1.0) -> LatticeField:
    """Cells with xi in [xi_lo, xi_hi] and tau - p(N) - p'(N)(xi - anchor) in [offset]."""
    k = np.arange(math.ceil(xi_lo / lattice.dxi - 1e-9), math.floor(xi_hi / lattice.dxi + 1e-9) + 1,
                  dtype=np.int64)
    xi = k * lattice.dxi
    line = phase(params, anchor_xi) + group_velocity(params, anchor_xi) * (xi - anchor_xi)
    m_lo = np.ceil((line + offset[0]) / lattice.dtau).astype(np.int64)
    m_hi = np.floor((line + offset[1]) / lattice.dtau).astype(np.int64)
    counts = np.maximum(m_hi - m_lo + 1, 0)
    ix = np.repeat(k, counts)
    shifts = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    return LatticeField(lattice, ix, np.repeat(m_lo, counts) + shifts, np.full(ix.size, value))


def case2_sets(spec: Counterexample2Spec, lattice: Optional[FourierLattice] = None) -> List[LatticeField]:
    """
    Indicators of A_0 .. A_m (unit values), in order.

    A_j (j < m): N <= |xi| <= N + w, 4^j <= |tau - p(xi)| < 4^(j+1).
    A_m: the two parallelograms hanging off the tangent line of p at +-N by
    4^m .. 4^(m+1), on the side away from the curve so A_m stays clear of the
    strips.
    """
    lattice = lattice or case2_lattice(spec)
    if lattice.dxi > spec.width / 8:
        raise ValidationError(f"lattice dxi = {lattice.dxi:.3g} does not resolve w = {spec.width:.3g}")
    n, w, params = spec.n_param, spec.width, spec.params
    sets = []
    for j in range(spec.m):
        lo, hi = 4.0 ** j, 4.0 ** (j + 1)
        bands = union(
            indicator(lattice, params, (n, n + w), (lo, hi)),
            indicator(lattice, params, (n, n + w), (-hi, -lo)),
        )
        keep = np.abs(bands.modulation(params)) < hi
        positive = LatticeField(lattice, bands.ix[keep], bands.it[keep], bands.values[keep])
        sets.append(union(positive, positive.reflected()))
    side = -math.copysign(1.0, phase_curvature(params, n))
    band = sorted((side * 4.0 ** spec.m, side * 4.0 ** (spec.m + 1)))
    upper = _parallelogram(lattice, params, n, n + w, n, (band[0], band[1]))
    sets.append(union(upper, upper.reflected()))
    return sets


def case2_lattice_field(spec: Counterexample2Spec, lattice: Optional[FourierLattice] = None) -> LatticeField:
    """f^ = N sum_j 4^(-j - m/4) a_j 1_{A_j} on the lattice."""
    sets = case2_sets(spec, lattice)
    scaled = [s.scaled(_case2_weight(spec, j)) for j, s in enumerate(sets)]
    return union(*scaled)


def _case2_weight(spec: Counterexample2Spec, j: int) -> float:
    return spec.n_param * 4.0 ** (-j - spec.m / 4.0) * spec.a_seq[j]


def _case2_reach(spec: Counterexample2Spec) -> float:
    """Largest |lambda| any A_j reaches: 4^(m+1) plus the bend of p off its tangent."""
    n, w, params = spec.n_param, spec.width, spec.params
    bend = abs(phase(params, n + w) - phase(params, n) - group_velocity(params, n) * w)
    return 4.0 ** (spec.m + 1) + bend


def case2_grid(spec: Counterexample2Spec) -> SpaceTimeGrid:
    """Smallest power-of-two space-time grid on which build_case2 resolves the sets."""
    box = 2.0 ** math.ceil(math.log2(16.0 * math.pi / spec.width))
    n = 2 ** math.ceil(math.log2(3.0 * (spec.n_param + spec.width) * box / math.pi))
    t_window = 4.0 * math.pi
    nt = 2 ** math.ceil(math.log2(2.5 * t_window * _case2_reach(spec) / math.pi))
    return SpaceTimeGrid(SpatialGrid(int(max(n, 8)), box), int(max(nt, 8)), t_window)


def build_case2(spec: Counterexample2Spec, grid: SpaceTimeGrid) -> SpaceTimeField:
    """
    Real field whose pulled-back spectrum is N sum_j 4^(-j - m/4) a_j 1_{A_j}.

    Membership follows case2_sets, tested at each (lambda, xi) grid point;
    only small N fit on a grid, the lattice form covers the rest.

    Raises:
        ValidationError: If dxi > w/8, dlambda > 1/4, or the dealiased band
            or the modulation range does not reach the sets
    """
    spatial = grid.spatial
    n, w, params = spec.n_param, spec.width, spec.params
    dlam = math.pi / grid.t_window
    if spatial.dxi > w / 8:
        raise ValidationError(f"dxi = {spatial.dxi:.3g} does not resolve w = {w:.3g}")
    if dlam > 0.25:
        raise ValidationError(f"dlambda = {dlam:.3g} exceeds 1/4")
    xi = spatial.wavenumbers
    if n + w > np.max(xi[dealias_mask(spatial)]):
        raise ValidationError(f"grid band does not reach xi = {n + w:.4g}")
    lam = grid.modulations
    reach = _case2_reach(spec)
    if reach > np.max(lam):
        raise ValidationError(f"modulations up to {np.max(lam):.4g} do not resolve |lambda| <= {reach:.4g}")

    mag = np.abs(xi)
    in_xi = ((mag >= n) & (mag <= n + w))[None, :]
    spectrum = np.zeros((grid.nt, spatial.n), dtype=complex)
    for j in range(spec.m):
        strip = (np.abs(lam) >= 4.0 ** j) & (np.abs(lam) < 4.0 ** (j + 1))
        spectrum[in_xi & strip[:, None]] = _case2_weight(spec, j)
    # (xi, tau) -> (-xi, -tau) folds the negative-frequency piece onto the positive one
    tangent = phase(params, mag) - phase(params, n) - group_velocity(params, n) * (mag - n)
    offset = np.sign(xi)[None, :] * lam[:, None] + tangent[None, :]
    side = -math.copysign(1.0, phase_curvature(params, n))
    band = sorted((side * 4.0 ** spec.m, side * 4.0 ** (spec.m + 1)))
    spectrum[in_xi & (offset >= band[0]) & (offset <= band[1])] = _case2_weight(spec, spec.m)
    return _field_from_spectrum(spectrum, grid, params, "case-2")


def case2_region_r(spec: Counterexample2Spec, lattice: Optional[FourierLattice] = None) -> LatticeField:
    """
    The pair of parallelograms R: centers (+-7w/12, 0), half the size of the
    A_m pieces in each direction (a quarter of the area), long sides along
    (1, p'(N)).
    """
    lattice = lattice or case2_lattice(spec)
    w = spec.width
    slope = group_velocity(spec.params, spec.n_param)
    half_height = 0.75 * 4.0 ** spec.m
    pieces = []
    for center in (-7.0 * w / 12.0, 7.0 * w / 12.0):
        k = np.arange(math.ceil((center - w / 4) / lattice.dxi - 1e-9),
                      math.floor((center + w / 4) / lattice.dxi + 1e-9) + 1, dtype=np.int64)
        line = slope * (k * lattice.dxi - center)
        m_lo = np.ceil((line - half_height) / lattice.dtau).astype(np.int64)
        m_hi = np.floor((line + half_height) / lattice.dtau).astype(np.int64)
        counts = np.maximum(m_hi - m_lo + 1, 0)
        ix = np.repeat(k, counts)
        shifts = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        pieces.append(LatticeField(lattice, ix, np.repeat(m_lo, counts) + shifts, np.ones(ix.size)))
    return union(*pieces)


def predicted_areas(spec: Counterexample2Spec) -> Dict[str, float]:
    """Exact areas of the continuous sets: A_j, A_m and R."""
    scale = spec.n_param ** -0.5
    areas = {f'A_{j}': 24.0 * 4.0 ** (j + spec.m / 2.0) * scale for j in range(spec.m)}
    areas[f'A_{spec.m}'] = 12.0 * 4.0 ** (1.5 * spec.m) * scale
    areas['R'] = 3.0 * 4.0 ** (1.5 * spec.m) * scale
    return areas


def harmonic_sequence(m: int) -> Tuple[float, ...]:
    """a_j = 1/(1+j) for j < m and a_m = 1."""
    return tuple([1.0 / (1.0 + j) for j in range(m)] + [1.0])


def case2_inequality_ratio(a_seq: Sequence[float]) -> Tuple[float, float]:
    """(a_m sum_j a_j, sum_j a_j^2); their ratio diverges like log m for harmonic a_j."""
    a = np.asarray(a_seq, dtype=float)
    if a.size == 0 or np.any(a <= 0):
        raise ValidationError("a_seq must be a nonempty sequence of positive numbers")
    return float(a[-1] * a.sum()), float(np.sum(a * a))
