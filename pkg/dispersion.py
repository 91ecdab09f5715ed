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
Dispersion symbol of the Benjamin equation and its resonance functions.

The linear part of

    u_t - gamma u_x + alpha H u_xx + beta u_xxx + (u^2)_x = 0

acts on the Fourier side as multiplication by ``i p(xi)`` with

    p(xi) = beta xi^3 - alpha xi |xi| + gamma xi.

Three-wave interactions on the hyperplane xi1 + xi2 + xi3 = 0 are governed by
the resonance function h = p(xi1) + p(xi2) + p(xi3). Because of the ``xi|xi|``
term h has no single polynomial closed form; it factors separately on six
sign regions of (xi1, xi2). The closed forms avoid the cancellation of the
direct sum and are what the probes use internally.
"""

import logging
import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Union

import numpy as np

from errors import ValidationError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class DispersionParams:
    """Coefficients (alpha, beta, gamma) of the dispersion symbol."""
    alpha: float = 0.0
    beta: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        for name in ('alpha', 'beta', 'gamma'):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite, got {value}")
        if self.beta == 0:
            raise ValidationError("beta must be nonzero (the symbol degenerates without the cubic term)")

    def as_dict(self) -> dict:
        return {'alpha': self.alpha, 'beta': self.beta, 'gamma': self.gamma}

    @property
    def resonance_threshold(self) -> float:
        """max{1, 4|alpha| / (3|beta|)}: frequencies above it see the cubic term dominate."""
        return max(1.0, 4.0 * abs(self.alpha) / (3.0 * abs(self.beta)))


@dataclass(frozen=True)
class FrequencyTriple:
    """Three wavenumbers summing to zero."""
    xi1: float
    xi2: float
    xi3: float

    def __post_init__(self):
        scale = max(abs(self.xi1), abs(self.xi2), abs(self.xi3))
        if abs(self.xi1 + self.xi2 + self.xi3) > 1e-12 * scale:
            raise ValidationError(
                f"frequencies must sum to zero: {self.xi1} + {self.xi2} + {self.xi3}"
            )

    @classmethod
    def from_pair(cls, xi1: float, xi2: float) -> 'FrequencyTriple':
        return cls(float(xi1), float(xi2), -(float(xi1) + float(xi2)))

    def magnitudes(self) -> tuple:
        """|xi_j| sorted in decreasing order (max, med, min)."""
        return tuple(sorted((abs(self.xi1), abs(self.xi2), abs(self.xi3)), reverse=True))


class HRegionId(IntEnum):
    """Sign regions of (xi1, xi2) on which h has a closed form."""
    H1 = 1  # xi1 >= 0, xi2 >= 0
    H2 = 2  # xi1 <= 0, xi2 <= 0
    H3 = 3  # xi1 >= 0, xi2 <= 0, xi1 + xi2 >= 0
    H4 = 4  # xi1 >= 0, xi2 <= 0, xi1 + xi2 <= 0
    H5 = 5  # xi1 <= 0, xi2 >= 0, xi1 + xi2 >= 0
    H6 = 6  # xi1 <= 0, xi2 >= 0, xi1 + xi2 <= 0


class QRegionId(IntEnum):
    """Sign regions of (xi2, xi - xi2) for the two-frequency phase q."""
    Q7 = 7    # both >= 0
    Q8 = 8    # both <= 0
    Q9 = 9    # xi2 >= 0, xi - xi2 <= 0
    Q10 = 10  # xi2 <= 0, xi - xi2 >= 0


def phase(params: DispersionParams, xi: ArrayLike) -> ArrayLike:
    """p(xi) = beta xi^3 - alpha xi|xi| + gamma xi (odd in xi)."""
    return params.beta * xi ** 3 - params.alpha * xi * np.abs(xi) + params.gamma * xi


def group_velocity(params: DispersionParams, xi: ArrayLike) -> ArrayLike:
    """p'(xi) = 3 beta xi^2 - 2 alpha |xi| + gamma (even in xi)."""
    return 3.0 * params.beta * xi ** 2 - 2.0 * params.alpha * np.abs(xi) + params.gamma


def phase_curvature(params: DispersionParams, xi: ArrayLike) -> ArrayLike:
    """p''(xi) = 6 beta xi - 2 alpha sgn(xi), with sgn(0) = 0."""
    return 6.0 * params.beta * xi - 2.0 * params.alpha * np.sign(xi)


def resonance_direct(params: DispersionParams, t: FrequencyTriple) -> float:
    """h = p(xi1) + p(xi2) + p(xi3) summed term by term."""
    return float(phase(params, t.xi1) + phase(params, t.xi2) + phase(params, t.xi3))


def _h_region_codes(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # np.select keeps the first true condition, so boundaries go to the lowest index
    c = a + b
    conditions = [
        (a >= 0) & (b >= 0),
        (a <= 0) & (b <= 0),
        (a >= 0) & (b <= 0) & (c >= 0),
        (a >= 0) & (b <= 0) & (c <= 0),
        (a <= 0) & (b >= 0) & (c >= 0),
    ]
    return np.select(conditions, [1, 2, 3, 4, 5], default=6)


def h_regions(a: ArrayLike, b: ArrayLike) -> np.ndarray:
    """Region numbers 1..6 for arrays of (xi1, xi2)."""
    return _h_region_codes(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def classify_h_region(t: FrequencyTriple) -> HRegionId:
    """Region of (xi1, xi2); on shared boundaries the lowest-numbered region wins."""
    code = _h_region_codes(np.asarray(t.xi1), np.asarray(t.xi2))
    return HRegionId(int(code))


def resonance_pair(params: DispersionParams, a: ArrayLike, b: ArrayLike) -> np.ndarray:
    """
    Two-frequency phase p(a) + p(b) - p(a + b), i.e. h(a, b, -(a + b)).

    Evaluated from the region closed forms, so the result carries relative
    precision even when the individual p values are many orders larger.
    gamma drops out identically.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    al, be = params.alpha, params.beta
    c = a + b
    region = _h_region_codes(a, b)
    forms = [
        a * b * (2 * al - 3 * be * c),
        -a * b * (2 * al + 3 * be * c),
        b * c * (2 * al - 3 * be * a),
        -a * c * (3 * be * b + 2 * al),
        a * c * (2 * al - 3 * be * b),
        -b * c * (3 * be * a + 2 * al),
    ]
    return np.select([region == k for k in range(1, 7)], forms)


def resonance_quotient(params: DispersionParams, a: ArrayLike, b: ArrayLike) -> np.ndarray:
    """
    (a + b) / (p(a) + p(b) - p(a + b)) with the (a + b) factor cancelled per region.

    This is the smooth kernel multiplying the quadratic term once the time
    integral of the Duhamel formula has been carried out. It is singular only
    where a or b vanishes or where a cubic factor crosses the alpha shift,
    neither of which happens for frequencies well above the resonance threshold.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    al, be = params.alpha, params.beta
    c = a + b
    region = _h_region_codes(a, b)
    with np.errstate(divide='ignore', invalid='ignore'):
        forms = [
            c / (a * b * (2 * al - 3 * be * c)),
            -c / (a * b * (2 * al + 3 * be * c)),
            1.0 / (b * (2 * al - 3 * be * a)),
            -1.0 / (a * (3 * be * b + 2 * al)),
            1.0 / (a * (2 * al - 3 * be * b)),
            -1.0 / (b * (3 * be * a + 2 * al)),
        ]
        return np.select([region == k for k in range(1, 7)], forms)


def resonance_closed(params: DispersionParams, t: FrequencyTriple) -> float:
    """h evaluated with the closed form of the region containing (xi1, xi2)."""
    return float(resonance_pair(params, t.xi1, t.xi2))


def lemma1_ratio(params: DispersionParams, t: FrequencyTriple) -> float:
    """|h| / (|xi1| |xi2| |xi3|); bounded below once all frequencies are large."""
    denom = abs(t.xi1) * abs(t.xi2) * abs(t.xi3)
    if denom == 0:
        raise ValidationError("lemma1_ratio needs three nonzero frequencies")
    return abs(resonance_closed(params, t)) / denom


def lemma1_floor_sweep(params: DispersionParams, max_exponent: int = 10,
                       steps_per_octave: int = 4) -> float:
    """
    Minimum of |h|/(|xi1||xi2||xi3|) over a dyadic grid of frequency pairs.

    Pairs are drawn from +/- 2^(k/steps_per_octave) for 0 <= k <= max_exponent *
    steps_per_octave and kept when N_max <= 2 N_med, N_med >= 2 * threshold and
    N_min > 0, where threshold = max{1, 4|alpha|/(3|beta|)}.

    Returns:
        The observed floor. ``nan`` when no pair qualifies.
    """
    exps = np.arange(0, max_exponent * steps_per_octave + 1) / steps_per_octave
    mags = 2.0 ** exps
    values = np.concatenate([mags, -mags])
    a, b = np.meshgrid(values, values, indexing='ij')
    a = a.ravel()
    b = b.ravel()
    c = -(a + b)
    sorted_mags = np.sort(np.abs(np.stack([a, b, c])), axis=0)
    n_min, n_med, n_max = sorted_mags
    keep = (n_min > 0) & (n_max <= 2 * n_med) & (n_med >= 2 * params.resonance_threshold)
    if not np.any(keep):
        logger.warning("lemma1 floor sweep found no qualifying triples")
        return float('nan')
    h = resonance_pair(params, a[keep], b[keep])
    ratio = np.abs(h) / (n_min[keep] * n_med[keep] * n_max[keep])
    logger.debug("lemma1 floor over %d triples: %.6g", ratio.size, ratio.min())
    return float(ratio.min())


def _q_region_codes(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    conditions = [
        (u >= 0) & (v >= 0),
        (u <= 0) & (v <= 0),
        (u >= 0) & (v <= 0),
    ]
    return np.select(conditions, [7, 8, 9], default=10)


def q_regions(xi: ArrayLike, xi2: ArrayLike) -> np.ndarray:
    """Region numbers 7..10 for arrays of (xi, xi2)."""
    xi = np.asarray(xi, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    return _q_region_codes(xi2, xi - xi2)


def classify_q_region(xi: float, xi2: float) -> QRegionId:
    code = _q_region_codes(np.asarray(xi2), np.asarray(xi - xi2))
    return QRegionId(int(code))


def q_closed(params: DispersionParams, xi: ArrayLike, xi2: ArrayLike,
             include_gamma: bool = False) -> ArrayLike:
    """
    q(xi, xi2) = p~(xi2) + p~(xi - xi2), p~ being p without its gamma term.

    Written around the midpoint w = xi2 - xi/2 as a completed square per region.
    With ``include_gamma`` the transport term gamma*xi is added back, which
    makes q equal to p(xi2) + p(xi - xi2).
    """
    xi = np.asarray(xi, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    al, be = params.alpha, params.beta
    w = xi2 - xi / 2.0
    shift = al / (3.0 * be)
    tail = be * xi ** 3 / 4.0 - al ** 2 * xi / (3.0 * be)
    region = _q_region_codes(xi2, xi - xi2)
    forms = [
        (3 * be * xi - 2 * al) * w ** 2 + 0.25 * (be * xi - 2 * al) * xi ** 2,
        (3 * be * xi + 2 * al) * w ** 2 + 0.25 * (be * xi + 2 * al) * xi ** 2,
        3 * be * xi * (w - shift) ** 2 + tail,
        3 * be * xi * (w + shift) ** 2 + tail,
    ]
    q = np.select([region == k for k in (7, 8, 9, 10)], forms)
    if include_gamma:
        q = q + params.gamma * xi
    return q if q.ndim else float(q)
