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
Tests for the bilinear-estimate probes: sampled fields, the sparse Fourier
lattice, the case-1 sweep and the case-2 construction.
"""
import math

import numpy as np
import pytest


class TestLattice:
    """Test sparse lattice fields."""

    @pytest.mark.unit
    @pytest.mark.bilinear
    def test_lattice_validation(self):
        """Spacings must be positive and index arrays aligned."""
        from bilinear_probe import FourierLattice, LatticeField
        from errors import ValidationError

        with pytest.raises(ValidationError):
            FourierLattice(0.0, 1.0)
        with pytest.raises(ValidationError):
            LatticeField(FourierLattice(1.0, 1.0), [0, 1], [0], [1.0, 2.0])

    @pytest.mark.unit
    @pytest.mark.bilinear
    def test_union_sums_coincident_cells(self):
        """Cells present in several fields add up."""
        from bilinear_probe import FourierLattice, LatticeField, union

        lat = FourierLattice(0.5, 0.25)
        f = LatticeField(lat, [0, 1], [0, 0], [1.0, 2.0])
        g = LatticeField(lat, [1, 2], [0, 3], [5.0, 1.0])
        u = union(f, g)
        assert u.size == 3
        assert u.value_at(1, 0) == 7.0
        assert u.value_at(2, 3) == 1.0
        assert u.area() == pytest.approx(3 * 0.125)

    @pytest.mark.unit
    @pytest.mark.bilinear
    def test_convolution_of_cells(self):
        """Convolution lands on index sums and carries the cell area."""
        from bilinear_probe import FourierLattice, LatticeField, convolve

        lat = FourierLattice(0.5, 0.25)
        f = LatticeField(lat, [1, 2], [0, 1], [1.0, 1.0])
        g = LatticeField(lat, [3], [-1], [2.0])
        out = convolve(f, g)
        assert out.value_at(4, -1) == pytest.approx(2.0 * lat.cell_area)
        assert out.value_at(5, 0) == pytest.approx(2.0 * lat.cell_area)
        assert out.size == 2

    @pytest.mark.unit
    @pytest.mark.bilinear
    def test_indicator_respects_modulation(self, benjamin_params):
        """Every cell of an indicator sits inside its modulation band."""
        from bilinear_probe import FourierLattice, indicator

        lat = FourierLattice(1.0 / 256, 1.0 / 8)
        f = indicator(lat, benjamin_params, (32.0, 32.25), (-1.0, 1.0))
        lam = f.modulation(benjamin_params)
        assert f.size > 0
        assert np.all(np.abs(lam) <= 1.0 + 1e-9)
        assert np.all((f.xi >= 32.0 - 1e-12) & (f.xi <= 32.25 + 1e-12))

    @pytest.mark.unit
    @pytest.mark.bilinear
    def test_reflection_is_hermitian(self, kdv_params):
        """f + its reflection is symmetric under (xi, tau) -> (-xi, -tau)."""
        from bilinear_probe import Counterexample1Spec, case1_sets, union

        a_set, minus_a, _ = case1_sets(Counterexample1Spec(64.0, kdv_params))
        assert union(a_set, minus_a).hermitian_defect() == 0.0
        assert a_set.hermitian_defect() > 0


class TestCase1:
    """Test the first counterexample."""

    @pytest.mark.unit
    @pytest.mark.bilinear
    def test_spec_validation(self):
        """N must be at least 4."""
        from bilinear_probe import Counterexample1Spec
        from errors import ValidationError

        with pytest.raises(ValidationError):
            Counterexample1Spec(2.0)

    @pytest.mark.unit
    @pytest.mark.bilinear
    @pytest.mark.parametrize("n", [64.0, 1024.0])
    def test_data_norm(self, n, kdv_params):
        """||1_A + 1_{-A}||_{L^2} is 2 N^(-1/4) within 15%."""
        from bilinear_probe import Counterexample1Spec, case1_sets, union

        a_set, minus_a, b_set = case1_sets(Counterexample1Spec(n, kdv_params))
        assert union(a_set, minus_a).l2() == pytest.approx(2 * n ** -0.25, rel=0.15)
        assert b_set.area() == pytest.approx(0.5 * n ** -0.5, rel=0.25)
        assert np.all(b_set.xi < 0)

    @pytest.mark.unit
    @pytest.mark.bilinear
    def test_coarse_lattice_rejected(self, kdv_params):
        """A lattice that cannot resolve A is refused."""
        from bilinear_probe import Counterexample1Spec, FourierLattice, case1_sets
        from errors import ValidationError

        with pytest.raises(ValidationError, match="resolve"):
            case1_sets(Counterexample1Spec(64.0, kdv_params), FourierLattice(0.1, 0.125))

    @pytest.mark.unit
    @pytest.mark.bilinear
    def test_ratio_validation(self, kdv_params):
        """eps must be positive and both factors nonzero."""
        from bilinear_probe import (Counterexample1Spec, FourierLattice, LatticeField, case1_sets,
                                    lattice_bilinear_ratio, dual_ratio)
        from errors import ValidationError

        a_set, _, b_set = case1_sets(Counterexample1Spec(64.0, kdv_params))
        with pytest.raises(ValidationError, match="eps"):
            lattice_bilinear_ratio(a_set, a_set, -1.0, 0.5, 0.0, kdv_params)
        empty = LatticeField(a_set.lattice, [], [], [])
        with pytest.raises(ValidationError, match="zero field"):
            lattice_bilinear_ratio(a_set, empty, -1.0, 0.5, 0.01, kdv_params)
        with pytest.raises(ValidationError, match="zero field"):
            dual_ratio(empty, b_set, -1.0, 0.5, 0.01, kdv_params)

    @pytest.mark.unit
    @pytest.mark.bilinear
    def test_predicted_slopes(self):
        """Closed-form exponents at s = -1, b = 1/2."""
        from bilinear_probe import predicted_case1_slopes

        slopes = predicted_case1_slopes(-1.0, 0.5, eps=0.0)
        assert slopes == pytest.approx({"direct": 0.5, "dual": 0.25, "lobe": 0.25})

    @pytest.mark.unit
    @pytest.mark.bilinear
    def test_fit_loglog(self):
        """An exact power law is fitted with zero residual."""
        from bilinear_probe import fit_loglog

        xs = [16.0, 64.0, 256.0]
        slope, residual = fit_loglog(xs, [3 * x ** 0.75 for x in xs])
        assert slope == pytest.approx(0.75)
        assert residual == pytest.approx(0.0, abs=1e-12)
        assert fit_loglog([16.0], [1.0]) == (None, None)

    @pytest.mark.slow
    @pytest.mark.integration
    @pytest.mark.bilinear
    @pytest.mark.parametrize("b", [0.3, 0.5, 0.7])
    def test_ratio_grows_below_threshold(self, b, kdv_params):
        """For s = -1 the ratio grows with N: slope at least 0.2."""
        from bilinear_probe import sweep_case1

        result = sweep_case1(-1.0, b, [2.0 ** k for k in range(6, 11)], kdv_params, threads=2)
        assert result.slope >= 0.2
        assert set(result.branches) == {"direct", "dual"}
        assert result.branch in result.branches

    @pytest.mark.slow
    @pytest.mark.integration
    @pytest.mark.bilinear
    def test_ratio_bounded_above_threshold(self, kdv_params):
        """For s = -1/2, b = 0.55 the ratios stay within a factor 4."""
        from bilinear_probe import sweep_case1

        result = sweep_case1(-0.5, 0.55, [2.0 ** k for k in range(6, 11)], kdv_params, threads=2)
        assert result.spread() <= 4.0

    @pytest.mark.unit
    @pytest.mark.bilinear
    def test_sweep_needs_values(self):
        """An empty N list is refused."""
        from bilinear_probe import sweep_case1
        from errors import ValidationError

        with pytest.raises(ValidationError):
            sweep_case1(-1.0, 0.5, [])


class TestSampledFields:
    """Test the grid-based ratio and case-1 field."""

    @pytest.mark.integration
    @pytest.mark.bilinear
    def test_case1_field(self, kdv_params):
        """The sampled field is real, has the right Fourier mass and a finite ratio."""
        from bilinear_probe import Counterexample1Spec, bilinear_ratio, build_case1, case1_grid, fourier_l2

        spec = Counterexample1Spec(16.0, kdv_params)
        grid = case1_grid(spec)
        u = build_case1(spec, grid)
        assert not np.iscomplexobj(u.values)
        assert fourier_l2(u, kdv_params) == pytest.approx(2 * 16.0 ** -0.25, rel=0.15)
        ratio = bilinear_ratio(u, u, -1.0, 0.5, 0.01, kdv_params)
        assert math.isfinite(ratio) and ratio > 0

    @pytest.mark.unit
    @pytest.mark.bilinear
    def test_coarse_grid_rejected(self, kdv_params):
        """A grid whose dxi exceeds N^(-1/2)/8 is refused."""
        from bilinear_probe import Counterexample1Spec, build_case1
        from bourgain import SpaceTimeGrid
        from grid_fourier import SpatialGrid
        from errors import ValidationError

        grid = SpaceTimeGrid(SpatialGrid(64, 10.0), 16, 4 * math.pi)
        with pytest.raises(ValidationError, match="resolve"):
            build_case1(Counterexample1Spec(16.0, kdv_params), grid)

    @pytest.mark.unit
    @pytest.mark.bilinear
    def test_ratio_rejects_mixed_grids(self, small_grid):
        """Both factors must share one grid."""
        from bilinear_probe import bilinear_ratio
        from bourgain import SpaceTimeField, SpaceTimeGrid
        from dispersion import DispersionParams
        from errors import ValidationError

        u = SpaceTimeField(SpaceTimeGrid(small_grid, 8, 1.0), np.ones((8, 64)))
        v = SpaceTimeField(SpaceTimeGrid(small_grid, 16, 1.0), np.ones((16, 64)))
        with pytest.raises(ValidationError, match="one grid"):
            bilinear_ratio(u, v, 0.0, 0.5, 0.01, DispersionParams())

    @pytest.fixture
    def free_bump(self, kdv_params):
        """Cut-off free evolution of a wide Gaussian on an (nx, nt) grid."""
        from bourgain import SpaceTimeGrid, apply_time_cutoff, linear_evolution
        from grid_fourier import RealField, SpatialGrid

        def _build(nx, nt, center=0.0):
            spatial = SpatialGrid(nx, 64.0)
            u0 = RealField(spatial, np.exp(-((spatial.points - center) / 4.0) ** 2))
            grid = SpaceTimeGrid(spatial, nt, 4.0)
            return apply_time_cutoff(linear_evolution(u0, grid, kdv_params), 1.0)
        return _build

    @pytest.mark.integration
    @pytest.mark.bilinear
    def test_ratio_stable_under_refinement(self, free_bump, kdv_params):
        """Doubling both resolutions moves the ratio of a smooth pair by at most 3%."""
        from bilinear_probe import bilinear_ratio

        coarse = bilinear_ratio(free_bump(64, 64), free_bump(64, 64, 5.0), 0.0, 0.5, 0.01, kdv_params)
        fine = bilinear_ratio(free_bump(128, 128), free_bump(128, 128, 5.0), 0.0, 0.5, 0.01, kdv_params)
        assert math.isfinite(coarse) and coarse > 0
        assert fine == pytest.approx(coarse, rel=0.03)

    @pytest.mark.unit
    @pytest.mark.bilinear
    def test_ratio_symmetric_in_factors(self, free_bump, kdv_params):
        """ratio(u, v) = ratio(v, u)."""
        from bilinear_probe import bilinear_ratio

        u, v = free_bump(64, 64), free_bump(64, 64, 5.0)
        assert bilinear_ratio(u, v, 0.0, 0.5, 0.01, kdv_params) == pytest.approx(
            bilinear_ratio(v, u, 0.0, 0.5, 0.01, kdv_params), rel=1e-12)

    @pytest.mark.unit
    @pytest.mark.bilinear
    def test_ratio_scale_invariant(self, free_bump, kdv_params):
        """Scaling one factor leaves the ratio unchanged."""
        from bilinear_probe import bilinear_ratio

        u, v = free_bump(64, 64), free_bump(64, 64, 5.0)
        base = bilinear_ratio(u, v, -0.5, 0.6, 0.01, kdv_params)
        assert bilinear_ratio(u.scaled(3.0), v, -0.5, 0.6, 0.01, kdv_params) == pytest.approx(base, rel=1e-10)
        assert bilinear_ratio(u, v.scaled(0.1), -0.5, 0.6, 0.01, kdv_params) == pytest.approx(base, rel=1e-10)


class TestCase1Convolution:
    """The self-convolution of 1_A + 1_{-A} near the origin."""

    @pytest.mark.integration
    @pytest.mark.bilinear
    def test_mass_along_thin_rectangle(self, kdv_params):
        """|f * f| >= N^(-1/2)/2 along the long axis of the rectangle at the origin."""
        from bilinear_probe import Counterexample1Spec, case1_sets, convolve, union
        from dispersion import group_velocity

        n = 64.0
        spec = Counterexample1Spec(n, kdv_params)
        a_set, minus_a, _ = case1_sets(spec)
        f = union(a_set, minus_a)
        conv = convolve(f, f)
        lat = f.lattice
        slope = group_velocity(kdv_params, n)
        # |xi| <= N^(-1/2)/8 keeps the curvature mismatch of A below 3/4
        for ix in range(-4, 5):
            it = int(round(slope * ix * lat.dxi / lat.dtau))
            assert conv.value_at(ix, it) >= 0.5 * n ** -0.5

    @pytest.mark.integration
    @pytest.mark.bilinear
    def test_origin_value(self, kdv_params):
        """At the origin both cross terms overlap fully: f * f(0) ~ 4 N^(-1/2)."""
        from bilinear_probe import Counterexample1Spec, case1_sets, convolve, union

        spec = Counterexample1Spec(64.0, kdv_params)
        a_set, minus_a, _ = case1_sets(spec)
        f = union(a_set, minus_a)
        assert convolve(f, f).value_at(0, 0) == pytest.approx(4.0 * spec.width, rel=0.1)


class TestCase2:
    """Test the second counterexample."""

    @pytest.fixture
    def case2_spec(self, kdv_params):
        """m = 1 at N = 4096."""
        from bilinear_probe import Counterexample2Spec, harmonic_sequence
        return Counterexample2Spec(4096.0, 1, harmonic_sequence(1), kdv_params)

    @pytest.mark.unit
    @pytest.mark.bilinear
    def test_spec_validation(self):
        """Sequence length, positivity and the N >= 16 * 4^(m+1) floor are checked."""
        from bilinear_probe import Counterexample2Spec
        from errors import ValidationError

        with pytest.raises(ValidationError, match="coefficients"):
            Counterexample2Spec(4096.0, 1, (1.0,))
        with pytest.raises(ValidationError, match="positive"):
            Counterexample2Spec(4096.0, 1, (1.0, 0.0))
        with pytest.raises(ValidationError, match="N/16"):
            Counterexample2Spec(64.0, 1, (1.0, 1.0))

    @pytest.mark.unit
    @pytest.mark.bilinear
    def test_areas_match_prediction(self, case2_spec):
        """Lattice areas of A_j, A_m and R agree with the closed forms within a factor 2."""
        from bilinear_probe import case2_region_r, case2_sets, predicted_areas

        predicted = predicted_areas(case2_spec)
        sets = case2_sets(case2_spec)
        for j, s in enumerate(sets):
            assert s.area() == pytest.approx(predicted[f"A_{j}"], rel=0.5)
        assert case2_region_r(case2_spec).area() == pytest.approx(predicted["R"], rel=0.5)

    @pytest.mark.unit
    @pytest.mark.bilinear
    def test_sets_are_disjoint_and_symmetric(self, case2_spec):
        """No cell is shared between sets; each set is symmetric."""
        from bilinear_probe import case2_sets

        sets = case2_sets(case2_spec)
        keys = np.concatenate([s.keys() for s in sets])
        assert np.unique(keys, axis=0).shape[0] == keys.shape[0]
        for s in sets:
            assert s.hermitian_defect() == 0.0

    @pytest.mark.unit
    @pytest.mark.bilinear
    def test_build_weights(self, case2_spec):
        """Each A_j carries N 4^(-j - m/4) a_j."""
        from bilinear_probe import case2_lattice_field, case2_sets

        f = case2_lattice_field(case2_spec)
        sets = case2_sets(case2_spec)
        for j, s in enumerate(sets):
            ix, it = s.ix[0], s.it[0]
            expected = 4096.0 * 4.0 ** (-j - 0.25) * case2_spec.a_seq[j]
            assert f.value_at(ix, it) == pytest.approx(expected)

    @pytest.mark.slow
    @pytest.mark.integration
    @pytest.mark.bilinear
    def test_grid_field_carries_the_weights(self, kdv_params):
        """On a resolving grid the spectrum is N a_m on A_m, zero elsewhere, with the predicted area."""
        from bilinear_probe import Counterexample2Spec, build_case2, case2_grid, predicted_areas
        from bourgain import pulled_back_spectrum

        spec = Counterexample2Spec(64.0, 0, (1.0,), kdv_params)
        grid = case2_grid(spec)
        u = build_case2(spec, grid)
        assert not np.iscomplexobj(u.values)
        spectrum = np.abs(pulled_back_spectrum(u, kdv_params))
        support = spectrum > 32.0
        np.testing.assert_allclose(spectrum[support], 64.0, rtol=1e-8)
        assert np.max(spectrum[~support]) < 1e-6
        area = np.count_nonzero(support) * grid.spatial.dxi * math.pi / grid.t_window
        assert area == pytest.approx(predicted_areas(spec)["A_0"], rel=0.5)

    @pytest.mark.unit
    @pytest.mark.bilinear
    def test_grid_must_resolve(self, kdv_params):
        """Too coarse in xi or too short in lambda is refused."""
        from bilinear_probe import Counterexample2Spec, build_case2, case2_grid
        from bourgain import SpaceTimeGrid
        from grid_fourier import SpatialGrid
        from errors import ValidationError

        spec = Counterexample2Spec(64.0, 0, (1.0,), kdv_params)
        with pytest.raises(ValidationError, match="resolve"):
            build_case2(spec, SpaceTimeGrid(SpatialGrid(64, 10.0), 16, 4 * math.pi))
        fine = case2_grid(spec)
        with pytest.raises(ValidationError, match="modulations"):
            build_case2(spec, SpaceTimeGrid(fine.spatial, 64, 4 * math.pi))

    @pytest.mark.unit
    @pytest.mark.bilinear
    def test_inequality_golden(self, golden):
        """Harmonic coefficients at m = 100 give the recorded lhs, rhs and ratio."""
        from bilinear_probe import case2_inequality_ratio, harmonic_sequence

        data = golden["case2_inequality"]
        lhs, rhs = case2_inequality_ratio(harmonic_sequence(data["m"]))
        assert lhs == pytest.approx(data["lhs"], abs=5e-3)
        assert rhs == pytest.approx(data["rhs"], abs=5e-3)
        assert lhs / rhs == pytest.approx(data["ratio"], abs=0.05)

    @pytest.mark.unit
    @pytest.mark.bilinear
    def test_ratio_diverges(self):
        """lhs/rhs increases strictly through m = 25, 100, 400."""
        from bilinear_probe import case2_inequality_ratio, harmonic_sequence

        ratios = [lhs / rhs for lhs, rhs in (case2_inequality_ratio(harmonic_sequence(m)) for m in (25, 100, 400))]
        assert ratios[0] < ratios[1] < ratios[2]

    @pytest.mark.unit
    @pytest.mark.bilinear
    def test_inequality_validation(self):
        """Empty or non-positive sequences are refused."""
        from bilinear_probe import case2_inequality_ratio
        from errors import ValidationError

        with pytest.raises(ValidationError):
            case2_inequality_ratio([])
        with pytest.raises(ValidationError):
            case2_inequality_ratio([1.0, -1.0])
