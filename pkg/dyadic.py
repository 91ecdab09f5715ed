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
Dyadic blocks of the three-wave multiplier.

A block fixes the sizes |xi_j| ~ N_j, |h(xi)| ~ H and |lambda_j| ~ L_j with
lambda_j = tau_j - p(xi_j). Most blocks vanish identically; the survivors obey
closed-form bounds depending on how the frequencies and modulations line up.
``block_norm_lower`` complements the closed forms with a numerical lower bound
for the block's trilinear norm, found by alternating maximization over
discretized L^2 test functions.

Comparability "~" means dyadic exponents at distance <= 1; "<<" means a gap of
at least 2.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from itertools import product
from typing import List, Optional, Tuple

import numpy as np

from dispersion import DispersionParams, resonance_pair
from errors import ConvergenceError, ValidationError

logger = logging.getLogger(__name__)

MAX_ITERATIONS = 50
RELATIVE_TOLERANCE = 1e-6
RANDOM_RESTARTS = 3
_CHUNK_ENTRIES = 2_000_000
QUADRATURE_CELLS = 32


@dataclass(frozen=True, order=True)
class DyadicValue:
    exponent: int

    @property
    def value(self) -> float:
        return 2.0 ** self.exponent

    @classmethod
    def of(cls, value: float) -> 'DyadicValue':
        exponent = math.log2(value) if value > 0 else math.nan
        if not math.isfinite(exponent) or exponent != round(exponent):
            raise ValidationError(f"{value} is not a power of two")
        return cls(int(round(exponent)))


def similar(a: DyadicValue, b: DyadicValue) -> bool:
    return abs(a.exponent - b.exponent) <= 1


def much_less(a: DyadicValue, b: DyadicValue) -> bool:
    return b.exponent - a.exponent >= 2


@dataclass(frozen=True)
class DyadicTriple:
    n1: DyadicValue
    n2: DyadicValue
    n3: DyadicValue
    h: DyadicValue
    l1: DyadicValue
    l2: DyadicValue
    l3: DyadicValue

    def __post_init__(self):
        for name in ('l1', 'l2', 'l3'):
            if getattr(self, name).exponent < 0:
                raise ValidationError(f"{name} must be >= 1")

    @classmethod
    def from_values(cls, n: Tuple[float, float, float], h: float,
                    l: Tuple[float, float, float]) -> 'DyadicTriple':
        """Build from plain powers of two, e.g. ``from_values((8, 8, 2), 128, (1, 1, 128))``."""
        return cls(*(DyadicValue.of(v) for v in n), DyadicValue.of(h), *(DyadicValue.of(v) for v in l))

    @property
    def ns(self) -> Tuple[DyadicValue, DyadicValue, DyadicValue]:
        return (self.n1, self.n2, self.n3)

    @property
    def ls(self) -> Tuple[DyadicValue, DyadicValue, DyadicValue]:
        return (self.l1, self.l2, self.l3)

    @property
    def n_sorted(self) -> Tuple[DyadicValue, DyadicValue, DyadicValue]:
        """(N_max, N_med, N_min)."""
        return tuple(sorted(self.ns, reverse=True))

    @property
    def l_sorted(self) -> Tuple[DyadicValue, DyadicValue, DyadicValue]:
        """(L_max, L_med, L_min)."""
        return tuple(sorted(self.ls, reverse=True))

    def permuted(self, order: Tuple[int, int, int]) -> 'DyadicTriple':
        ns, ls = self.ns, self.ls
        return DyadicTriple(*(ns[i] for i in order), self.h, *(ls[i] for i in order))

    def as_row(self) -> Tuple[int, ...]:
        return tuple(int(v.value) for v in (*self.ns, self.h, *self.ls))


class Coherence(str, Enum):
    PLUS_PLUS = 'plus_plus'
    PLUS_MINUS = 'plus_minus'
    OTHER = 'other'
    HIGH_MODULATION = 'high_modulation'


@dataclass(frozen=True)
class BlockBound:
    value: float
    case_tag: Coherence


def passes_vanishing_conditions(t: DyadicTriple, params: Optional[DispersionParams] = None) -> bool:
    """
    True iff the block can be nonzero.

    Needs N_max ~ N_med and L_max ~ max{H, L_med}; once N_med reaches
    max{1, 4|alpha|/(3|beta|)} the resonance size is pinned as well,
    H ~ N_max^2 N_min.
    """
    params = params or DispersionParams()
    n_max, n_med, n_min = t.n_sorted
    l_max, l_med, _ = t.l_sorted
    if not similar(n_max, n_med):
        return False
    if not similar(l_max, max(t.h, l_med)):
        return False
    if n_med.value >= params.resonance_threshold:
        expected = DyadicValue(2 * n_max.exponent + n_min.exponent)
        if not similar(t.h, expected):
            return False
    return True


def vanishing(t: DyadicTriple, params: Optional[DispersionParams] = None) -> bool:
    """Alias of :func:`passes_vanishing_conditions` (true when the block survives)."""
    return passes_vanishing_conditions(t, params)


def _plus_plus_shape(t: DyadicTriple) -> bool:
    n_max, _, n_min = t.n_sorted
    return similar(n_max, n_min) and similar(t.l_sorted[0], t.h)


def _plus_minus_index(t: DyadicTriple) -> Optional[int]:
    ns, ls = t.ns, t.ls
    for k in range(3):
        i, j = [m for m in range(3) if m != k]
        if not (similar(ns[i], ns[j]) and much_less(ns[k], ns[i]) and much_less(ns[k], ns[j])):
            continue
        others = max(ls[i], ls[j])
        if similar(t.h, ls[k]) and ls[k].exponent >= others.exponent - 1:
            return k
    return None


def applicable_case(t: DyadicTriple) -> Coherence:
    """Pick the bound matching the triple's shape; high modulation takes precedence."""
    l_max, l_med, _ = t.l_sorted
    if similar(l_max, l_med) and much_less(t.h, l_med):
        return Coherence.HIGH_MODULATION
    if _plus_plus_shape(t):
        return Coherence.PLUS_PLUS
    if _plus_minus_index(t) is not None:
        return Coherence.PLUS_MINUS
    return Coherence.OTHER


def block_bound(t: DyadicTriple, coherence: Coherence,
                params: Optional[DispersionParams] = None) -> BlockBound:
    """
    Closed-form bound for one block.

    Raises:
        ValidationError: If the block vanishes (and the case is not high
            modulation) or the triple does not have the case's shape
    """
    coherence = Coherence(coherence)
    n_max, _, n_min = (v.value for v in t.n_sorted)
    l_max, l_med, l_min = (v.value for v in t.l_sorted)
    h = t.h.value

    if coherence is Coherence.HIGH_MODULATION:
        if not (similar(t.l_sorted[0], t.l_sorted[1]) and much_less(t.h, t.l_sorted[1])):
            raise ValidationError("high_modulation needs L_max ~ L_med >> H")
        return BlockBound(math.sqrt(l_min) * math.sqrt(n_min), coherence)

    if not passes_vanishing_conditions(t, params):
        raise ValidationError(f"block {t.as_row()} vanishes; no bound to evaluate")

    if coherence is Coherence.PLUS_PLUS:
        if not _plus_plus_shape(t):
            raise ValidationError("plus_plus needs N_max ~ N_min and L_max ~ H")
        value = math.sqrt(l_min) * n_max ** -0.25 * l_med ** 0.25
    elif coherence is Coherence.PLUS_MINUS:
        if _plus_minus_index(t) is None:
            raise ValidationError("plus_minus needs N_i ~ N_j >> N_k with H ~ L_k >~ the other modulations")
        value = math.sqrt(l_min) / n_max * math.sqrt(min(h, n_max / n_min * l_med))
    else:
        value = math.sqrt(l_min) / n_max * math.sqrt(min(h, l_med))
    return BlockBound(value, coherence)


# ==================== Numerical lower bound ====================

@dataclass
class _Shell:
    """
    Test-function cells on {|xi| in [N, 2N)} x {|lambda| in [L, 2L)}, both signs.

    Cells split each half-shell into ``res`` pieces per axis; quadrature
    points split it into ``samples`` pieces, independent of ``res``.
    """
    n: float
    l: float
    res: int
    samples: int

    @property
    def size(self) -> int:
        return (2 * self.res) ** 2

    @property
    def measure(self) -> float:
        return (self.n / self.res) * (self.l / self.res)

    def points(self, scale: float) -> np.ndarray:
        offsets = (np.arange(self.samples) + 0.5) / self.samples
        return np.concatenate([scale * (1 + offsets), -scale * (1 + offsets)])

    def snap(self, values: np.ndarray, scale: float) -> np.ndarray:
        """Cell index along one axis, -1 outside the shell."""
        mag = np.abs(values)
        cell = np.floor((mag - scale) / (scale / self.res)).astype(np.int64)
        inside = (cell >= 0) & (cell < self.res)
        cell = np.where(values < 0, cell + self.res, cell)
        return np.where(inside, cell, -1)

    def index(self, xi_cell: np.ndarray, lam_cell: np.ndarray) -> np.ndarray:
        return xi_cell * (2 * self.res) + lam_cell


def _canonical_pairs(t: DyadicTriple) -> List[Tuple[DyadicValue, DyadicValue]]:
    """(N_j, L_j) pairs in a fixed order, so the estimate ignores slot order."""
    return sorted(zip(t.ns, t.ls), key=lambda pair: (pair[0].exponent, pair[1].exponent))


def _pack(idx, size: int) -> np.ndarray:
    return (idx[0] * size + idx[1]) * size + idx[2]


def _unpack(keys: np.ndarray, size: int):
    return keys // (size * size), (keys // size) % size, keys % size


def _merge(keys: np.ndarray, counts: np.ndarray):
    unique, inverse = np.unique(keys, return_inverse=True)
    return unique, np.bincount(inverse.ravel(), weights=counts, minlength=unique.size).astype(np.int64)


def _block_tensor(pairs, h_value: float, params: DispersionParams, res: int, samples: int):
    """
    Quadrature counts of the block region per cell triple.

    The zero-sum surface is parameterized by xi of the two smaller-N slots
    and lambda of the two smaller-L slots; the remaining xi and lambda follow
    from sum xi = 0 and sum lambda = -h. Every entry carries the same
    quadrature weight, returned alongside the integer counts.
    """
    shells = [_Shell(n.value, l.value, res, samples) for n, l in pairs]
    xa, xb = np.meshgrid(shells[0].points(shells[0].n), shells[1].points(shells[1].n), indexing='ij')
    xa, xb = xa.ravel(), xb.ravel()
    xi_cells = [shells[0].snap(xa, shells[0].n), shells[1].snap(xb, shells[1].n),
                shells[2].snap(-(xa + xb), shells[2].n)]
    h = resonance_pair(params, xa, xb)
    habs = np.abs(h)
    keep = (xi_cells[2] >= 0) & (habs >= h_value) & (habs < 2 * h_value)
    if not np.any(keep):
        return None
    xi_cells = [c[keep] for c in xi_cells]
    h = h[keep]

    dep = max(range(3), key=lambda j: (pairs[j][1].exponent, j))
    c, d = (j for j in range(3) if j != dep)
    lc, ld = np.meshgrid(shells[c].points(shells[c].l), shells[d].points(shells[d].l), indexing='ij')
    lam_sum = (lc + ld).ravel()
    lam_cells = {c: shells[c].snap(lc.ravel(), shells[c].l), d: shells[d].snap(ld.ravel(), shells[d].l)}

    size = shells[0].size
    keys, counts = [], []
    chunk = max(1, _CHUNK_ENTRIES // lam_sum.size)
    for start in range(0, h.size, chunk):
        stop = start + chunk
        dep_cell = shells[dep].snap(-h[start:stop, None] - lam_sum[None, :], shells[dep].l)
        rows, cols = np.nonzero(dep_cell >= 0)
        if rows.size == 0:
            continue
        lam = {c: lam_cells[c][cols], d: lam_cells[d][cols], dep: dep_cell[rows, cols]}
        idx = [shells[j].index(xi_cells[j][start:stop][rows], lam[j]) for j in range(3)]
        chunk_keys, chunk_counts = np.unique(_pack(idx, size), return_counts=True)
        keys.append(chunk_keys)
        counts.append(chunk_counts)
    if not keys:
        return None
    keys, total = _merge(np.concatenate(keys), np.concatenate(counts).astype(float))
    weight = (shells[0].n / samples) * (shells[1].n / samples) * (shells[c].l / samples) * (shells[d].l / samples)
    return _unpack(keys, size), total, weight


def _coarse_cells(res: int) -> np.ndarray:
    """Map each cell at ``res`` to the cell containing it at ``res // 2``."""
    axis = np.arange(2 * res)
    axis = (axis // res) * (res // 2) + (axis % res) // 2
    return (axis[:, None] * res + axis[None, :]).ravel()


def _coarsen(idx, counts: np.ndarray, res: int):
    mapping = _coarse_cells(res)
    coarse = [mapping[i] for i in idx]
    size = res * res
    keys, total = _merge(_pack(coarse, size), counts.astype(float))
    return _unpack(keys, size), total


def _contract(idx, weight, fields, target, size):
    others = [k for k in range(3) if k != target]
    values = weight * fields[others[0]][idx[others[0]]] * fields[others[1]][idx[others[1]]]
    return np.bincount(idx[target], weights=values, minlength=size)


def _alternate(idx, weight, shells, fields) -> Tuple[float, list]:
    objective = -math.inf
    for iteration in range(MAX_ITERATIONS):
        previous = objective
        for target in (2, 0, 1):
            g = _contract(idx, weight, fields, target, shells[target].size)
            mu = shells[target].measure
            norm = math.sqrt(float(np.sum(g * g)) / mu)
            if norm == 0:
                return 0.0, fields
            fields[target] = g / mu / norm
            if norm < objective * (1 - 1e-12):
                raise ConvergenceError(
                    f"alternating maximization decreased: {norm:.12g} < {objective:.12g}"
                )
            objective = norm
        logger.debug("alternating maximization iteration %d: %.9g", iteration + 1, objective)
        if previous > 0 and objective - previous <= RELATIVE_TOLERANCE * previous:
            break
    return objective, fields


def _starts(shells, seed: int) -> List[list]:
    starts = [[np.full(s.size, 1.0 / math.sqrt(s.size * s.measure)) for s in shells]]
    rng = np.random.Generator(np.random.Philox(seed))
    for _ in range(RANDOM_RESTARTS):
        start = []
        for s in shells:
            f = np.abs(rng.standard_normal(s.size))
            start.append(f / math.sqrt(float(np.sum(f * f)) * s.measure))
        starts.append(start)
    return starts


def block_norm_lower(t: DyadicTriple, params: DispersionParams, resolution: int,
                     seed: int = 0) -> float:
    """
    Lower bound for the block's trilinear norm by alternating maximization.

    Test functions are constant on ``resolution`` cells per sign and axis of
    [N_j, 2N_j) x [L_j, 2L_j). The region is integrated with a midpoint rule
    on ``max(resolution, QUADRATURE_CELLS)`` points per sign and axis, so for
    every resolution up to that count the cells nest and share one quadrature.
    The maximization climbs from the coarsest level (16 cells) to
    ``resolution``, each level also starting from the previous optimum; with
    two factors fixed the optimal third is the normalized partial contraction,
    so the value never drops between levels. Each level additionally starts
    from constants and three Philox-seeded random positive fields.

    Returns:
        0 when the block vanishes or its discretized region is empty
    """
    if resolution < 16:
        raise ValidationError(f"resolution must be >= 16, got {resolution}")
    if not passes_vanishing_conditions(t, params):
        return 0.0
    pairs = _canonical_pairs(t)
    samples = max(resolution, QUADRATURE_CELLS)
    tensor = _block_tensor(pairs, t.h.value, params, resolution, samples)
    if tensor is None:
        logger.debug("block %s has an empty discretized region", t.as_row())
        return 0.0
    idx, counts, weight = tensor

    levels = [(resolution, idx, counts)]
    res = resolution
    while res % 2 == 0 and res // 2 >= 16:
        idx, counts = _coarsen(idx, counts, res)
        res //= 2
        levels.append((res, idx, counts))

    best, fields = 0.0, None
    for res, idx, counts in reversed(levels):
        shells = [_Shell(n.value, l.value, res, samples) for n, l in pairs]
        starts = _starts(shells, seed)
        if fields is not None:
            mapping = _coarse_cells(res)
            starts.append([f[mapping] for f in fields])
        best, fields = max((_alternate(idx, weight * counts, shells, start) for start in starts),
                           key=lambda run: run[0])
        logger.debug("block %s at resolution %d: %d cell triples, lower bound %.6g",
                     t.as_row(), res, counts.size, best)
    return best


def regression_triples(params: DispersionParams, n_max_exp: int, l_max_exp: int,
                       limit: Optional[int] = None) -> List[DyadicTriple]:
    """Non-vanishing triples with N exponents in [0, n_max_exp] and L exponents in [0, l_max_exp]."""
    found = []
    n_range = range(0, n_max_exp + 1)
    l_range = range(0, l_max_exp + 1)
    for n1, n2, n3 in product(n_range, repeat=3):
        if not (n1 >= n2 >= n3):
            continue
        h_exp = 2 * n1 + n3
        for l1, l2, l3 in product(l_range, repeat=3):
            t = DyadicTriple(DyadicValue(n1), DyadicValue(n2), DyadicValue(n3), DyadicValue(h_exp),
                             DyadicValue(l1), DyadicValue(l2), DyadicValue(l3))
            if passes_vanishing_conditions(t, params):
                found.append(t)
                if limit is not None and len(found) >= limit:
                    return found
    return found
